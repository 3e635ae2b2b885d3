"""Problem/result text formats and the command-line front end.

The formats are line-oriented: keyword lines in a fixed order, numeric
payloads wrapped at a few values per line, everything serialized with 17
significant digits so writing and re-parsing reproduces doubles bit-exactly.
Exit codes: 0 success, 2 malformed input, 3 non-convergence, 4 internal
error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
import scipy.sparse as sp

from . import alm
from .alm import AlmOptions, ProblemData, SolveResult, kkt_residuals, solve
from .cone import Block, ConeSpec
from .linsys import SparseSymmetric
from .problems import build_srlasso, gen_meb, gen_trs, lambda_from_lambda_c, \
    load_srlasso_csv

FORMAT_VERSION = 1
_VALUES_PER_LINE = 6

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INTERNAL = 4


class ProblemFormatError(ValueError):
    """Malformed problem or result file; message carries line context."""


def _fmt(v: float) -> str:
    if not np.isfinite(v):
        raise ValueError("cannot serialize non-finite value")
    return format(float(v), ".17g")


def _write_array(fh, values):
    values = np.asarray(values, dtype=float).ravel()
    for i in range(0, values.size, _VALUES_PER_LINE):
        fh.write(" ".join(_fmt(v) for v in values[i:i + _VALUES_PER_LINE]))
        fh.write("\n")


def _write_triplets(fh, rows, cols, vals):
    for r, c, v in zip(rows, cols, vals):
        fh.write(f"{int(r)} {int(c)} {_fmt(v)}\n")


class _Reader:
    def __init__(self, text, name):
        self.lines = text.splitlines()
        self.name = name
        self.pos = 0

    def error(self, msg, line=None):
        line = self.pos if line is None else line
        raise ProblemFormatError(f"{self.name}: line {line}: {msg}")

    def next_line(self):
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if line:
                return line
        self.error("unexpected end of file")

    def next_raw_line(self):
        if self.pos >= len(self.lines):
            self.error("unexpected end of file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def keyword(self, *expected):
        line = self.next_line()
        toks = line.split()
        if toks[0] not in expected:
            self.error(f"expected {' or '.join(expected)!r}, found {toks[0]!r}")
        return toks

    def keyword_int(self, name):
        toks = self.keyword(name)
        if len(toks) != 2:
            self.error(f"field {name!r} needs exactly one integer")
        try:
            return int(toks[1])
        except ValueError:
            self.error(f"field {name!r}: {toks[1]!r} is not an integer")

    def keyword_float(self, name):
        toks = self.keyword(name)
        if len(toks) != 2:
            self.error(f"field {name!r} needs exactly one number")
        try:
            return float(toks[1])
        except ValueError:
            self.error(f"field {name!r}: {toks[1]!r} is not a number")

    def read_floats(self, count, what):
        start = self.pos
        toks = []
        while len(toks) < count:
            toks.extend(self.next_line().split())
        if len(toks) != count:
            self.error(f"section {what!r}: expected {count} values, got "
                       f"{len(toks)}", line=start + 1)
        try:
            return np.asarray(toks, dtype=float)
        except ValueError:
            self.error(f"section {what!r}: non-numeric value", line=start + 1)

    def read_triplets(self, count, what):
        start = self.pos
        toks = []
        for _ in range(count):
            toks.extend(self.next_line().split())
        if len(toks) != 3 * count:
            self.error(f"section {what!r}: expected {count} 'row col value' "
                       f"lines", line=start + 1)
        try:
            flat = np.asarray(toks, dtype=float)
        except ValueError:
            self.error(f"section {what!r}: non-numeric entry", line=start + 1)
        trip = flat.reshape(count, 3)
        idx = trip[:, :2]
        if np.any(idx != np.floor(idx)):
            self.error(f"section {what!r}: fractional index", line=start + 1)
        return idx[:, 0].astype(np.int64), idx[:, 1].astype(np.int64), trip[:, 2]


def write_problem(problem: ProblemData, path):
    """Serialize a problem instance; round-trips bit-exactly for finite data."""
    A = sp.coo_matrix(problem.A)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"socalm problem {FORMAT_VERSION}\n")
        fh.write(f"m {problem.m}\n")
        fh.write(f"n {problem.n}\n")
        fh.write(f"cone {len(problem.cone.blocks)}\n")
        for blk in problem.cone.blocks:
            fh.write(f"{blk.kind} {blk.dim}\n")
        fh.write("b\n")
        _write_array(fh, problem.b)
        fh.write("c\n")
        _write_array(fh, problem.c)
        fh.write(f"A {A.nnz}\n")
        _write_triplets(fh, A.row, A.col, A.data)
        if problem.is_quadratic:
            H = problem.H
            fh.write(f"H {H.nnz_lower}\n")
            _write_triplets(fh, H.rows, H.cols, H.vals)
        fh.write("end\n")


def parse_problem(path) -> ProblemData:
    """Read and validate a problem file, with line-level diagnostics."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    r = _Reader(text, str(path))
    head = r.keyword("socalm")
    if len(head) != 3 or head[1] != "problem":
        r.error("expected header 'socalm problem <version>'")
    if head[2] != str(FORMAT_VERSION):
        r.error(f"unsupported format version {head[2]}")
    m = r.keyword_int("m")
    n = r.keyword_int("n")
    nblocks = r.keyword_int("cone")
    blocks = []
    for _ in range(nblocks):
        toks = r.keyword("nonneg", "soc")
        if len(toks) != 2:
            r.error("cone block line must be '<kind> <dim>'")
        try:
            dim = int(toks[1])
        except ValueError:
            r.error(f"cone block dim {toks[1]!r} is not an integer")
        blocks.append(Block(toks[0], dim))
    total = sum(blk.dim for blk in blocks)
    if total != n:
        r.error(f"cone dims sum to {total}, expected n = {n}")
    try:
        cone = ConeSpec(blocks)
    except ValueError as err:
        r.error(f"cone: {err}")
    r.keyword("b")
    b = r.read_floats(m, "b")
    r.keyword("c")
    c = r.read_floats(n, "c")
    nnz = r.keyword_int("A")
    ar, ac, av = r.read_triplets(nnz, "A")
    if nnz and (ar.min() < 0 or ar.max() >= m or ac.min() < 0 or ac.max() >= n):
        r.error("section 'A': index out of range")
    A = sp.csr_matrix((av, (ar, ac)), shape=(m, n))
    toks = r.keyword("H", "end")
    H = None
    if toks[0] == "H":
        hnnz = int(toks[1])
        hr, hc, hv = r.read_triplets(hnnz, "H")
        if hnnz and (hr.min() < 0 or hr.max() >= n or hc.min() < 0 or hc.max() >= n):
            r.error("section 'H': index out of range")
        if np.any(hr < hc):
            r.error("section 'H': entries must satisfy row >= col")
        H = SparseSymmetric(n, hr, hc, hv)
        r.keyword("end")
    try:
        return ProblemData(H, A, b, c, cone)
    except ValueError as err:
        r.error(f"inconsistent data: {err}")


def write_result(result: SolveResult, path, include_solution=False):
    """Serialize a solve result; timings sit on their own line so outputs
    are otherwise deterministic."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"socalm result {FORMAT_VERSION}\n")
        fh.write(f"status {result.status}\n")
        fh.write(f"pobj {_fmt(result.pobj)}\n")
        fh.write(f"dobj {_fmt(result.dobj)}\n")
        for i, v in enumerate(
                (result.delta1, result.delta2, result.delta3, result.delta4), 1):
            fh.write(f"delta{i} {_fmt(v)}\n")
        fh.write(f"natural_map_norm {_fmt(result.natural_map_norm)}\n")
        fh.write(f"outer_iters {result.outer_iters}\n")
        fh.write(f"newton_iters {result.newton_iters}\n")
        fh.write(f"krylov_iters {result.krylov_iters}\n")
        fh.write(f"wall_time {_fmt(result.wall_time)}\n")
        fh.write(f"complementarity {len(result.complementarity)}\n")
        for rep in result.complementarity:
            fh.write(f"{rep.block_id} {rep.kind} {rep.x3_status} "
                     f"{rep.y_status} {rep.category} "
                     f"{int(rep.strictly_complementary)} {_fmt(rep.margin)} "
                     f"{_fmt(rep.inner_product)}\n")
        fh.write(f"iterlog {len(result.iteration_log)}\n")
        for line in result.iteration_log:
            fh.write(line + "\n")
        fh.write(f"solution {int(bool(include_solution))}\n")
        if include_solution:
            for name, vec in (("x1", result.x1), ("x2", result.x2),
                              ("x3", result.x3), ("y", result.y)):
                fh.write(f"{name} {len(vec)}\n")
                _write_array(fh, vec)
        fh.write("end\n")


class ResultData:
    """Parsed result file (mirror of the solver result, vectors optional)."""

    def __init__(self, **kw):
        self.__dict__.update(kw)


def parse_result(path) -> ResultData:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    r = _Reader(text, str(path))
    head = r.keyword("socalm")
    if len(head) != 3 or head[1] != "result":
        r.error("expected header 'socalm result <version>'")
    toks = r.keyword("status")
    status = toks[1]
    fields = {"status": status}
    fields["pobj"] = r.keyword_float("pobj")
    fields["dobj"] = r.keyword_float("dobj")
    for i in range(1, 5):
        fields[f"delta{i}"] = r.keyword_float(f"delta{i}")
    fields["natural_map_norm"] = r.keyword_float("natural_map_norm")
    fields["outer_iters"] = r.keyword_int("outer_iters")
    fields["newton_iters"] = r.keyword_int("newton_iters")
    fields["krylov_iters"] = r.keyword_int("krylov_iters")
    fields["wall_time"] = r.keyword_float("wall_time")
    ncomp = r.keyword_int("complementarity")
    comp = []
    for _ in range(ncomp):
        toks = r.next_line().split()
        if len(toks) != 8:
            r.error("complementarity row needs 8 fields")
        comp.append(alm.BlockReport(
            block_id=int(toks[0]), kind=toks[1], x3_status=toks[2],
            y_status=toks[3], category=toks[4],
            strictly_complementary=bool(int(toks[5])), margin=float(toks[6]),
            inner_product=float(toks[7])))
    fields["complementarity"] = comp
    nlog = r.keyword_int("iterlog")
    log = []
    for _ in range(nlog):
        log.append(r.next_raw_line())
    fields["iteration_log"] = log
    has_solution = r.keyword_int("solution")
    fields["has_solution"] = bool(has_solution)
    if has_solution:
        for name in ("x1", "x2", "x3", "y"):
            cnt = r.keyword_int(name)
            fields[name] = r.read_floats(cnt, name)
    r.keyword("end")
    return ResultData(**fields)


def _build_parser():
    p = argparse.ArgumentParser(
        prog="socalm",
        description="Cone-program solver (augmented Lagrangian with a "
                    "semismooth Newton inner loop)")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve a problem file")
    ps.add_argument("problem")
    ps.add_argument("--tol", type=float, default=1e-8)
    ps.add_argument("--max-iter", type=int, default=100)
    ps.add_argument("--sigma0", type=float, default=None)
    ps.add_argument("--criterion-b", action="store_true",
                    help="also enforce the rate-targeting accuracy test")
    ps.add_argument("--out", default=None, help="result file path "
                    "(default: <problem>.result)")
    ps.add_argument("--solution", action="store_true",
                    help="store solution vectors in the result file")

    pg = sub.add_parser("gen", help="generate a problem file")
    gsub = pg.add_subparsers(dest="family", required=True)
    gm = gsub.add_parser("meb", help="pseudo-random enclosing-ball instance")
    gm.add_argument("--m", type=int, required=True)
    gm.add_argument("--d", type=int, required=True)
    gm.add_argument("-o", "--out", required=True)
    gt = gsub.add_parser("trs", help="synthetic trust-region instance")
    gt.add_argument("--d", type=int, required=True)
    gt.add_argument("--seed", type=int, default=0)
    gt.add_argument("-o", "--out", required=True)
    gl = gsub.add_parser("srlasso", help="square-root Lasso from CSV data")
    gl.add_argument("--csv", required=True)
    gl.add_argument("--lambda-c", type=float, required=True, dest="lambda_c")
    gl.add_argument("-o", "--out", required=True)

    pc = sub.add_parser("check", help="validate a problem file")
    pc.add_argument("problem")

    pd = sub.add_parser("diag", help="recompute residuals for a solved result")
    pd.add_argument("problem")
    pd.add_argument("result")
    return p


def _cmd_solve(args):
    problem = parse_problem(args.problem)
    options = AlmOptions(tol=args.tol, max_outer=args.max_iter,
                         sigma0=args.sigma0, use_criterion_b=args.criterion_b)
    result = solve(problem, options, log=sys.stdout)
    out = args.out if args.out else args.problem + ".result"
    write_result(result, out, include_solution=args.solution)
    print(f"status {result.status}  kkt {result.kkt_residual:.3e}  "
          f"outer {result.outer_iters}  newton {result.newton_iters}  "
          f"time {result.wall_time:.2f}s")
    print(f"result written to {out}")
    return EXIT_OK if result.status == alm.OPTIMAL else EXIT_NO_CONVERGENCE


def _cmd_gen(args):
    if args.family == "meb":
        _, problem = gen_meb(args.m, args.d)
    elif args.family == "trs":
        _, problem = gen_trs(args.d, args.seed)
    else:
        B, w = load_srlasso_csv(args.csv)
        lam = lambda_from_lambda_c(args.lambda_c, B.shape[1])
        _, problem = build_srlasso(B, w, lam)
    write_problem(problem, args.out)
    print(f"wrote {args.family} instance: m={problem.m} n={problem.n} "
          f"-> {args.out}")
    return EXIT_OK


def _cmd_check(args):
    problem = parse_problem(args.problem)
    kinds = {}
    for blk in problem.cone.blocks:
        kinds.setdefault(blk.kind, []).append(blk.dim)
    print(f"valid problem: m={problem.m} n={problem.n} "
          f"{'quadratic' if problem.is_quadratic else 'linear'}")
    for kind, dims in kinds.items():
        if len(dims) > 4:
            print(f"  {kind}: {len(dims)} blocks, dims "
                  f"{min(dims)}..{max(dims)}")
        else:
            print(f"  {kind}: dims {dims}")
    return EXIT_OK


def _cmd_diag(args):
    problem = parse_problem(args.problem)
    res = parse_result(args.result)
    if not res.has_solution:
        raise ProblemFormatError(
            f"{args.result}: no solution vectors stored; re-run solve with "
            "--solution")
    d1, d2, d3, d4, pobj, dobj = kkt_residuals(problem, res.x1, res.x2,
                                               res.x3, res.y)
    stored = (res.delta1, res.delta2, res.delta3, res.delta4)
    print("residual   recomputed       stored")
    agree = True
    for name, rec, st in zip(("delta1", "delta2", "delta3", "delta4"),
                             (d1, d2, d3, d4), stored):
        flag = ""
        if abs(rec - st) > 1e-12 * max(1.0, abs(st)):
            flag = "  MISMATCH"
            agree = False
        print(f"{name:8s} {rec:14.8e} {st:14.8e}{flag}")
    print(f"gap        pobj {pobj:.10e}  dobj {dobj:.10e}")
    report = alm.diagnose_strict_complementarity(problem, res)
    strict = sum(r.strictly_complementary for r in report)
    print(f"strict complementarity: {strict}/{len(report)} blocks")
    for rep in report:
        print(f"  block {rep.block_id:4d} [{rep.kind}] x3={rep.x3_status} "
              f"y={rep.y_status} {rep.category} margin={rep.margin:.3e}")
    if not agree:
        print("warning: stored residuals disagree with recomputation")
    return EXIT_OK


def cli_main(argv) -> int:
    """Entry point used by the console script; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_INPUT if err.code not in (0, None) else EXIT_OK
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "diag":
            return _cmd_diag(args)
        return EXIT_INPUT
    except (ProblemFormatError, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as err:  # internal failure: keep the exit-code contract
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INTERNAL


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()

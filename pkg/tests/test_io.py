"""File-format round trips, validation diagnostics, and the CLI."""

import numpy as np
import pytest
import scipy.sparse as sp

from socalm import (
    AlmOptions,
    ConeSpec,
    ProblemData,
    ProblemFormatError,
    SparseSymmetric,
    cli_main,
    gen_meb,
    parse_problem,
    parse_result,
    solve,
    write_problem,
    write_result,
)


def random_problem(seed=0, quadratic=True):
    rng = np.random.default_rng(seed)
    cone = ConeSpec.make(nonneg=3, soc=[3, 4])
    n = cone.total_dim
    m = 4
    A = sp.random(m, n, density=0.6, random_state=rng.integers(1 << 31))
    A = sp.csr_matrix(A)
    H = None
    if quadratic:
        G = rng.standard_normal((n, n)) * 0.3
        H = SparseSymmetric.from_dense(G @ G.T)
    return ProblemData(H, A, rng.standard_normal(m), rng.standard_normal(n),
                       cone)


class TestProblemRoundTrip:
    @pytest.mark.parametrize("quadratic", [False, True])
    def test_bit_exact(self, tmp_path, quadratic):
        p = random_problem(3, quadratic)
        f = tmp_path / "prob.txt"
        write_problem(p, f)
        q = parse_problem(f)
        assert np.array_equal(p.b, q.b)
        assert np.array_equal(p.c, q.c)
        assert (p.A != q.A).nnz == 0
        assert p.cone == q.cone
        if quadratic:
            assert np.array_equal(p.H.to_csr().toarray(),
                                  q.H.to_csr().toarray())
        else:
            assert not q.is_quadratic

    def test_generated_meb_round_trip(self, tmp_path):
        _, p = gen_meb(5, 3)
        f = tmp_path / "meb.txt"
        write_problem(p, f)
        q = parse_problem(f)
        assert np.array_equal(p.c, q.c)
        assert (p.A != q.A).nnz == 0


class TestProblemValidation:
    def _write_and_patch(self, tmp_path, pattern, replacement):
        p = random_problem(1, quadratic=True)
        f = tmp_path / "prob.txt"
        write_problem(p, f)
        text = f.read_text().replace(pattern, replacement, 1)
        g = tmp_path / "bad.txt"
        g.write_text(text)
        return g

    def test_cone_sum_mismatch_names_cone(self, tmp_path):
        g = self._write_and_patch(tmp_path, "nonneg 3", "nonneg 2")
        with pytest.raises(ProblemFormatError, match="cone"):
            parse_problem(g)

    def test_h_upper_triangle_rejected(self, tmp_path):
        p = random_problem(2, quadratic=True)
        f = tmp_path / "prob.txt"
        write_problem(p, f)
        lines = f.read_text().splitlines()
        idx = next(i for i, ln in enumerate(lines) if ln.startswith("H "))
        first = lines[idx + 1].split()
        # swap row/col of a strictly lower entry to force row < col
        j = idx + 1
        while True:
            r, c, v = lines[j].split()
            if r != c:
                lines[j] = f"{c} {r} {v}"
                break
            j += 1
        g = tmp_path / "bad.txt"
        g.write_text("\n".join(lines) + "\n")
        with pytest.raises(ProblemFormatError, match="row >= col"):
            parse_problem(g)

    def test_truncated_file(self, tmp_path):
        p = random_problem(4, quadratic=False)
        f = tmp_path / "prob.txt"
        write_problem(p, f)
        text = f.read_text()
        g = tmp_path / "trunc.txt"
        g.write_text(text[: len(text) // 2])
        with pytest.raises(ProblemFormatError):
            parse_problem(g)

    def test_index_out_of_range(self, tmp_path):
        cone = ConeSpec.make(nonneg=2)
        p = ProblemData(None, sp.csr_matrix(np.eye(2)), np.ones(2),
                        np.ones(2), cone)
        f = tmp_path / "prob.txt"
        write_problem(p, f)
        text = f.read_text().replace("A 2", "A 2").replace("1 1 1", "1 5 1")
        g = tmp_path / "bad.txt"
        g.write_text(text)
        with pytest.raises(ProblemFormatError, match="range"):
            parse_problem(g)


class TestResultRoundTrip:
    def test_result_file(self, tmp_path):
        _, p = gen_meb(4, 2)
        res = solve(p, AlmOptions())
        f = tmp_path / "out.res"
        write_result(res, f, include_solution=True)
        r = parse_result(f)
        assert r.status == res.status
        assert r.delta3 == res.delta3
        assert r.outer_iters == res.outer_iters
        assert r.iteration_log == res.iteration_log
        assert np.array_equal(r.y, res.y)
        assert np.array_equal(r.x2, res.x2)
        assert len(r.complementarity) == len(res.complementarity)

    def test_without_solution(self, tmp_path):
        _, p = gen_meb(4, 2)
        res = solve(p, AlmOptions())
        f = tmp_path / "out.res"
        write_result(res, f, include_solution=False)
        r = parse_result(f)
        assert not r.has_solution


class TestCli:
    def test_gen_check_solve_diag_pipeline(self, tmp_path, capsys):
        prob = str(tmp_path / "m.prob")
        out = str(tmp_path / "m.res")
        assert cli_main(["gen", "meb", "--m", "6", "--d", "3", "-o", prob]) == 0
        assert cli_main(["check", prob]) == 0
        assert cli_main(["solve", prob, "--out", out, "--solution"]) == 0
        assert cli_main(["diag", prob, out]) == 0
        captured = capsys.readouterr()
        assert "MISMATCH" not in captured.out

    def test_gen_trs_and_solve(self, tmp_path):
        prob = str(tmp_path / "t.prob")
        assert cli_main(["gen", "trs", "--d", "10", "--seed", "2",
                         "-o", prob]) == 0
        assert cli_main(["solve", prob, "--tol", "1e-8"]) == 0

    def test_gen_srlasso_from_csv(self, tmp_path):
        csv = tmp_path / "data.csv"
        rng = np.random.default_rng(0)
        B = rng.standard_normal((10, 4))
        w = B @ np.array([1.0, -2.0, 0.0, 0.0]) + 0.1 * rng.standard_normal(10)
        rows = ["a,b,c,d,target"]
        for i in range(10):
            rows.append(",".join(str(v) for v in np.append(B[i], w[i])))
        csv.write_text("\n".join(rows) + "\n")
        prob = str(tmp_path / "l.prob")
        assert cli_main(["gen", "srlasso", "--csv", str(csv),
                         "--lambda-c", "0.5", "-o", prob]) == 0
        assert cli_main(["solve", prob]) == 0

    def test_check_on_truncated_file_exits_2(self, tmp_path):
        prob = tmp_path / "m.prob"
        assert cli_main(["gen", "meb", "--m", "4", "--d", "2",
                         "-o", str(prob)]) == 0
        text = prob.read_text()
        prob.write_text(text[: len(text) // 3])
        assert cli_main(["check", str(prob)]) == 2

    def test_missing_file_exits_2(self):
        assert cli_main(["check", "/nonexistent/file.prob"]) == 2

    def test_diag_without_solution_exits_2(self, tmp_path):
        prob = str(tmp_path / "m.prob")
        out = str(tmp_path / "m.res")
        cli_main(["gen", "meb", "--m", "4", "--d", "2", "-o", prob])
        cli_main(["solve", prob, "--out", out])  # no --solution
        assert cli_main(["diag", prob, out]) == 2

    def test_nonconvergence_exits_3(self, tmp_path):
        # dual-infeasible system cannot reach Optimal
        cone = ConeSpec.make(nonneg=1)
        p = ProblemData(None, sp.csr_matrix(np.array([[1.0], [-1.0]])),
                        np.array([1.0, 1.0]), np.array([0.0]), cone)
        f = str(tmp_path / "bad.prob")
        write_problem(p, f)
        assert cli_main(["solve", f, "--max-iter", "5"]) == 3

    def test_bad_arguments_exit_2(self):
        assert cli_main(["gen", "meb", "--m", "6"]) == 2
        assert cli_main(["frobnicate"]) == 2


class TestDeterminism:
    def test_repeated_pipeline_identical_modulo_timing(self, tmp_path):
        files = []
        for tag in ("a", "b"):
            prob = tmp_path / f"{tag}.prob"
            out = tmp_path / f"{tag}.res"
            assert cli_main(["gen", "meb", "--m", "8", "--d", "3",
                             "-o", str(prob)]) == 0
            assert cli_main(["solve", str(prob), "--out", str(out),
                             "--solution"]) == 0
            files.append((prob.read_text(), out.read_text()))
        assert files[0][0] == files[1][0]
        strip = lambda text: "\n".join(
            ln for ln in text.splitlines() if not ln.startswith("wall_time"))
        assert strip(files[0][1]) == strip(files[1][1])

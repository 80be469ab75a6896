"""Command-line driver: exit codes, output formats, determinism."""

import subprocess
import sys

import pytest

from matchain import parse_records
from matchain.cli import main

VECTOR_CHAIN = """\
# vector chain
matrix M1 100 100
matrix M2 100 100
vector x 100
vector y 100
compute y = M1 * M2 * x
"""

INDEXED = """\
index i 8
matrix A 5 5
matrix B 5 5
vector c 5 indices=i
vector G 5 indices=i
compute G[i] = A * B * c[i]
"""

TRIANGULAR = """\
matrix L1 100 100 lower_triangular
matrix L2 100 100 lower_triangular
matrix C 100 100
compute C = L1 * L2
"""


def run(tmp_path, capsys, text, *args):
    problem = tmp_path / "problem.mc"
    problem.write_text(text)
    code = main([str(problem), *args])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTextOutput:
    def test_basic_listing(self, tmp_path, capsys):
        code, out, err = run(tmp_path, capsys, VECTOR_CHAIN)
        assert code == 0
        assert err == ""
        assert out == (
            "# compute y = M1 * M2 * x\n"
            "T0 := gemm(M2, x)   # T0 := M2 * x flops=20000\n"
            "y := gemm(M1, T0)   # y := M1 * T0 flops=20000\n"
            "# total_flops=40000\n"
        )

    def test_naive_and_verify_annotations(self, tmp_path, capsys):
        code, out, err = run(tmp_path, capsys, VECTOR_CHAIN, "--naive", "--verify")
        assert code == 0
        assert out.endswith(
            "# total_flops=40000\n"
            "# naive_flops=2020000 ratio=50.5\n"
            "# oracle=agree\n"
        )

    def test_indexed_loops_rendered(self, tmp_path, capsys):
        code, out, err = run(tmp_path, capsys, INDEXED)
        assert code == 0
        assert out == (
            "# compute G[i] = A * B * c[i]\n"
            "T0 := gemm(A, B)   # T0 := A * B flops=250\n"
            "for i in 1..8:\n"
            "    G[i] := gemm(T0, c[i])   # G[i] := T0 * c[i] flops=50\n"
            "# total_flops=650\n"
        )

    def test_multiple_statements_blank_line_separated(self, tmp_path, capsys):
        text = INDEXED + "compute G[i] = A * B * c[i]\n"
        code, out, err = run(tmp_path, capsys, text)
        assert code == 0
        blocks = out.split("\n\n")
        assert len(blocks) == 2
        assert blocks[0].startswith("# compute")
        assert blocks[1].startswith("# compute")

    def test_memory_metric(self, tmp_path, capsys):
        code, out, err = run(tmp_path, capsys, VECTOR_CHAIN, "--metric", "memory")
        assert code == 0
        assert "# total_memory=200" in out

    def test_triangular_uses_specialized_kernel(self, tmp_path, capsys):
        code, out, err = run(tmp_path, capsys, TRIANGULAR)
        assert code == 0
        assert "trtrmm" in out
        assert "# total_flops=333333\n" in out


class TestRecordsOutput:
    def test_records_parse_back(self, tmp_path, capsys):
        code, out, err = run(tmp_path, capsys, VECTOR_CHAIN, "--format", "records")
        assert code == 0
        plan = parse_records(out)
        assert plan.total_cost == 40_000
        assert plan.parenthesization == (0, (1, 2))

    def test_statement_and_annotations_present(self, tmp_path, capsys):
        code, out, err = run(
            tmp_path, capsys, VECTOR_CHAIN,
            "--format", "records", "--naive", "--verify", "--seed", "5",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "statement lineno=6 source='y = M1 * M2 * x'"
        assert lines[3] == (
            "summary target=y metric=flops total=40000.0 parens='(0 (1 2))' seed=5"
        )
        assert lines[4] == "naive total=2020000.0 ratio=50.5"
        assert lines[5] == "verify oracle=agree oracle_total=40000.0"

    def test_runs_bit_identical(self, tmp_path, capsys):
        code1, out1, _ = run(tmp_path, capsys, INDEXED, "--format", "records")
        code2, out2, _ = run(tmp_path, capsys, INDEXED, "--format", "records")
        assert code1 == code2 == 0
        assert out1 == out2


class TestKernelConfig:
    def test_override_changes_selection(self, tmp_path, capsys):
        kernels = tmp_path / "kernels.cfg"
        kernels.write_text(
            "kernel sqmm arity=2 tags=id;id req=square;square cost=m*m*n\n"
        )
        code, out, err = run(
            tmp_path, capsys, VECTOR_CHAIN, "--kernels", str(kernels)
        )
        assert code == 0
        # sqmm halves the square multiply cost but the vector steps keep gemm.
        assert "gemm" in out

    def test_config_error_exits_one(self, tmp_path, capsys):
        kernels = tmp_path / "kernels.cfg"
        kernels.write_text("kernel bad arity=1 tags=id req= cost=m**2\n")
        code, out, err = run(tmp_path, capsys, VECTOR_CHAIN, "--kernels", str(kernels))
        assert code == 1
        assert out == ""
        assert "line 1" in err


class TestFailureModes:
    def test_missing_file(self, capsys):
        code = main(["/nonexistent/problem.mc"])
        captured = capsys.readouterr()
        assert code == 1
        assert captured.err.startswith("matchain: ")

    def test_problem_error_line_number(self, tmp_path, capsys):
        code, out, err = run(tmp_path, capsys, "matrix A 4\n")
        assert code == 1
        assert "line 1" in err

    def test_diagnostics_reported_with_location(self, tmp_path, capsys):
        text = (
            "matrix A 4 5\n"
            "matrix B 6 2\n"
            "matrix C 4 2\n"
            "compute C = A * B\n"
        )
        code, out, err = run(tmp_path, capsys, text)
        assert code == 1
        assert "line 4" in err
        assert "DimensionMismatch" in err

    def test_non_square_inverse_diagnostic(self, tmp_path, capsys):
        text = (
            "matrix A 4 5\n"
            "matrix B 5 2\n"
            "matrix C 4 2\n"
            "compute C = A^-1 * B\n"
        )
        code, out, err = run(tmp_path, capsys, text)
        assert code == 1
        assert "NonSquareInverse" in err

    def test_no_kernel_exits_two(self, tmp_path, capsys):
        kernels = tmp_path / "kernels.cfg"
        # Restrict gemm to transposed inputs; plain A * B then has no
        # applicable kernel and no prep can introduce the missing tags.
        kernels.write_text("kernel gemm arity=2 tags=t;t req=; cost=2*m*k*n\n")
        text = (
            "matrix A 4 4\n"
            "matrix B 4 4\n"
            "matrix C 4 4\n"
            "compute C = A * B\n"
        )
        problem = tmp_path / "problem.mc"
        problem.write_text(text)
        code = main([str(problem), "--kernels", str(kernels)])
        captured = capsys.readouterr()
        assert code == 2
        assert "matchain: " in captured.err

    def test_verify_rejects_long_chains(self, tmp_path, capsys):
        decls = "".join(f"matrix A{t} 4 4\n" for t in range(9))
        text = decls + "matrix Z 4 4\ncompute Z = " + " * ".join(
            f"A{t}" for t in range(9)
        ) + "\n"
        code, out, err = run(tmp_path, capsys, text, "--verify")
        assert code == 2
        assert "factors" in err

    def test_later_statements_still_emitted(self, tmp_path, capsys):
        kernels = tmp_path / "kernels.cfg"
        kernels.write_text("kernel gemm arity=2 tags=t;t req=; cost=2*m*k*n\n")
        text = (
            "matrix A 4 4\n"
            "matrix B 4 4\n"
            "matrix C 4 4\n"
            "matrix D 4 4\n"
            "compute C = A * B\n"
            "compute D = A^T\n"
        )
        problem = tmp_path / "problem.mc"
        problem.write_text(text)
        code = main([str(problem), "--kernels", str(kernels)])
        captured = capsys.readouterr()
        assert code == 2
        assert "D := transp(A)" in captured.out


class TestInstalledScript:
    def test_console_entry_point(self, tmp_path):
        problem = tmp_path / "problem.mc"
        problem.write_text(VECTOR_CHAIN)
        result = subprocess.run(
            [sys.executable, "-m", "matchain", str(problem)],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert "# total_flops=40000" in result.stdout

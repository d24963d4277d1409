import io
import json
import math

import pytest

from shadowlab.cli import COMMANDS, format_number, render_table, run
from shadowlab.geometry import PlanePoint
from shadowlab.montecarlo import RandomStream, estimate_mean_shadow

# small, fast invocations of every command
FAST_ARGS = {
    "shadow-mean": ["--mu", "0.6,0", "--samples", "2000"],
    "shadow-risk": ["--mu-polar", "0.5,1", "--c=-2", "--samples", "2000"],
    "risk-curve": ["--c-values=-2,-0.25", "--rho-values", "0,0.5", "--samples", "1000"],
    "density-eval": ["--mu", "0.3,0.4", "--points", "5"],
    "density-gof": ["--mu", "0.5,0", "--samples", "5000", "--bins", "10"],
    "posterior-mean": ["--theta", "0,1", "--panels", "64"],
    "bayes-opt": ["--step", "0.01"],
    "poisson-demo": ["--x", "3", "--lam", "1"],
    "gaussian-demo": ["--samples", "2000"],
}


def invoke(*argv):
    out, err = io.BytesIO(), io.BytesIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


class TestRender:
    def test_empty_csv_is_header(self):
        assert render_table([], ("a", "b"), "csv") == b"a,b\n"

    def test_shortest_round_trip(self):
        assert render_table([(1.0, 0.5)], ("a", "b"), "csv") == b"a,b\n1,0.5\n"

    @pytest.mark.parametrize("v", [0.1, 1 / 3, -2.5e-300, 6.02214076e23, math.pi])
    def test_round_trip_exact(self, v):
        assert float(format_number(v)) == v

    def test_json_single_and_array(self):
        assert json.loads(render_table([(1.0, 2)], ("a", "b"), "json", single=True)) == {"a": 1.0, "b": 2}
        assert json.loads(render_table([(1.0, 2)], ("a", "b"), "json")) == [{"a": 1.0, "b": 2}]

    def test_json_key_order(self):
        text = render_table([{"z": 1, "a": 2}], ("z", "a"), "json", single=True).decode()
        assert text.index('"z"') < text.index('"a"')


class TestCommands:
    def test_help(self):
        code, out, _ = invoke("--help")
        assert code == 0 and b"usage" in out

    def test_subcommand_help(self):
        code, out, _ = invoke("density-gof", "--help")
        assert code == 0 and b"--bins" in out

    @pytest.mark.parametrize("command", COMMANDS)
    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_every_command_runs(self, command, fmt):
        code, out, err = invoke(command, *FAST_ARGS[command], "--format", fmt)
        assert code == 0, err
        if fmt == "json":
            json.loads(out)
        else:
            assert out.endswith(b"\n") and b"\r" not in out

    @pytest.mark.parametrize("command", COMMANDS)
    def test_deterministic(self, command):
        a = invoke(command, *FAST_ARGS[command], "--seed", "5")
        b = invoke(command, *FAST_ARGS[command], "--seed", "5", "--workers", "3")
        assert a == b

    def test_default_seed_is_zero(self):
        assert invoke("shadow-mean", "--samples", "500") == invoke("shadow-mean", "--samples", "500", "--seed", "0")

    def test_shadow_mean_matches_library(self):
        code, out, _ = invoke("shadow-mean", "--mu", "0.6,0", "--samples", "20000", "--seed", "42")
        assert code == 0
        header, row = out.decode().splitlines()
        assert header == "mean_x,mean_y,se_x,se_y,n"
        r = estimate_mean_shadow(PlanePoint(0.6, 0.0), 20000, RandomStream(42))
        assert [float(v) for v in row.split(",")] == [r.mean.x, r.mean.y, *r.std_error, 20000]

    def test_polar_and_cartesian_agree(self):
        a = invoke("shadow-mean", "--mu", "0,0.5", "--samples", "1000")
        # polar (0.5, pi/2) rounds to a slightly different Cartesian point; compare loosely
        b = invoke("shadow-mean", "--mu-polar", "0.5,1.5707963267948966", "--samples", "1000")
        ra = [float(v) for v in a[1].decode().splitlines()[1].split(",")]
        rb = [float(v) for v in b[1].decode().splitlines()[1].split(",")]
        assert ra == pytest.approx(rb, abs=1e-12)

    def test_poisson_demo(self):
        code, out, _ = invoke("poisson-demo", "--x", "3", "--format", "json")
        data = json.loads(out)
        assert code == 0
        assert data["unbiased_estimate"] == -1
        assert data["mle_estimate"] == math.exp(-6)

    def test_risk_curve_line_count(self):
        code, out, _ = invoke("risk-curve", "--c-values=-2,-0.25", "--rho-values", "0,0.5,1", "--samples", "1000")
        assert code == 0 and len(out.decode().splitlines()) == 7

    def test_bayes_opt(self):
        code, out, _ = invoke("bayes-opt", "--c-lo=-1", "--c-hi", "0", "--step", "1e-3", "--format", "json")
        assert json.loads(out) == {"c_star": -0.25, "risk": 0.4375}

    def test_density_eval_values(self):
        code, out, _ = invoke("density-eval", "--mu-polar", "0.5,0", "--theta", "3.141592653589793", "--format", "json")
        (row,) = json.loads(out)
        assert row["density"] == pytest.approx(1.5 / (2 * math.pi), abs=1e-15)


class TestErrors:
    @pytest.mark.parametrize(
        "argv, needle",
        [
            (["no-such-command"], b"invalid choice"),
            (["shadow-mean", "--bogus"], b"unrecognized"),
            (["shadow-mean", "--mu", "2,0"], b"unit disk"),
            (["shadow-mean", "--mu", "0,0", "--mu-polar", "0,0"], b"not allowed"),
            (["shadow-mean", "--samples", "10"], b"--samples"),
            (["shadow-mean", "--mu", "abc"], b"numbers"),
            (["density-gof", "--bins", "36", "--samples", "1000"], b"--samples"),
            (["density-eval", "--theta", "7"], b"--theta"),
            (["bayes-opt", "--step", "0"], b"--step"),
            (["gaussian-demo", "--n", "1"], b"--n"),
            (["poisson-demo", "--x=-1"], b"--x"),
            (["shadow-mean", "--seed=-1"], b"--seed"),
            (["shadow-mean", "--format", "xml"], b"invalid choice"),
            ([], b"required"),
        ],
    )
    def test_usage_errors(self, argv, needle):
        code, out, err = invoke(*argv)
        assert code == 2
        assert out == b""
        assert needle in err

    def test_runtime_error(self):
        code, out, err = invoke("density-gof", "--mu", "1,0", "--bins", "400", "--samples", "20000")
        assert code == 1
        assert out == b"" and b"expected count" in err

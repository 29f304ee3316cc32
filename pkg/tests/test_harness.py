import io
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mumimo import cli
from mumimo.asymptotics import czf_asymptotic_rate, modified_cmf_rate, modified_czf_rate
from mumimo.errors import InvalidArguments, TooLarge
from mumimo.harness import ExperimentSpec, RateReport, RateRow, SimMode, emit_report, parse_modes, read_report, run_monte_carlo
from mumimo.harness.montecarlo import AsymptoticRow, welford
from mumimo.harness.report import asymptotic_path


def small_spec(**kw):
    base = dict(M=8, N=2, k_values=(2, 3), snr_values_db=(0.0, 10.0),
                modes=parse_modes("bdzf,czf,cmf,mczf,mcmf,proposed"), trials=3, master_seed=5)
    base.update(kw)
    return ExperimentSpec(**base)


class TestSpec:
    def test_parse_modes(self):
        assert parse_modes("czf, proposed") == (SimMode.CZF, SimMode.PROPOSED)
        with pytest.raises(InvalidArguments):
            parse_modes("zf")

    def test_k_above_m(self):
        with pytest.raises(InvalidArguments):
            small_spec(k_values=(9,))


class TestWelford:
    def test_constant(self):
        assert welford([0.1] * 7) == (0.1, 0.0)

    def test_matches_two_pass(self):
        xs = [1.0, 4.0, 2.5, 9.0, -3.0]
        mean = sum(xs) / len(xs)
        std = math.sqrt(sum((x - mean) ** 2 for x in xs) / len(xs))
        m, s = welford(xs)
        assert m == pytest.approx(mean) and s == pytest.approx(std)


class TestMonteCarlo:
    def test_deterministic(self):
        a = run_monte_carlo(small_spec(trials=1))
        b = run_monte_carlo(small_spec(trials=1))
        assert a == b

    def test_row_per_cell(self):
        r = run_monte_carlo(small_spec())
        assert len(r.rows) == 2 * 2 * 6
        assert all(row.mean_rate >= 0 and row.std_rate >= 0 and row.trials == 3 for row in r.rows)

    def test_asymptotic_rows(self):
        r = run_monte_carlo(small_spec())
        assert len(r.asymptotic_rows) == len(r.rows)
        P = 10.0
        assert r.asymptotic("CZF", 3, 10.0).predicted_rate == czf_asymptotic_rate(8, 6, P, 1.0).value
        assert r.asymptotic("ModifiedCZF", 3, 10.0).predicted_rate == modified_czf_rate(8, 2, 3, P, 1.0).value
        proposed = r.asymptotic("ProposedTS", 2, 10.0).predicted_rate
        assert proposed == max(modified_czf_rate(8, 2, 2, P, 1.0).value, modified_cmf_rate(8, 2, 2, P, 1.0).value)

    def test_infeasible_common_modes(self):
        r = run_monte_carlo(small_spec(M=16, k_values=(16,), snr_values_db=(0.0,), trials=2))
        assert {c.mode for c in r.infeasible} == {"BDZF", "CZF", "CMF"}
        assert {row.mode for row in r.rows} == {"ModifiedCZF", "ModifiedCMF", "ProposedTS"}

    def test_oracle_cap_is_fatal(self):
        with pytest.raises(TooLarge):
            run_monte_carlo(small_spec(M=16, k_values=(8,), modes=(SimMode.ORACLE,), max_evals=100))

    def test_adding_modes_keeps_draws(self):
        a = run_monte_carlo(small_spec(modes=(SimMode.CZF,)))
        b = run_monte_carlo(small_spec(modes=(SimMode.CMF, SimMode.CZF)))
        for row in a.rows:
            assert b.row("CZF", row.K, row.snr_db) == row

    def test_czf_close_to_limit(self):
        spec = ExperimentSpec(64, 2, (5,), (10.0,), (SimMode.CZF,), trials=2000, master_seed=1)
        r = run_monte_carlo(spec)
        expected = czf_asymptotic_rate(64, 10, 10.0, 1.0).value
        assert abs(r.rows[0].mean_rate / expected - 1) <= 0.03

    def test_bdzf_t_override(self):
        r = run_monte_carlo(small_spec(modes=(SimMode.BDZF,), bdzf_t=3, k_values=(3,)))
        assert r.rows and not r.infeasible
        r = run_monte_carlo(small_spec(modes=(SimMode.BDZF,), bdzf_t=5, k_values=(3,)))
        assert not r.rows and r.infeasible

    def test_proposed_supports_full_user_load(self):
        spec = ExperimentSpec(16, 2, (16,), (0.0,), (SimMode.PROPOSED,), trials=5)
        r = run_monte_carlo(spec)
        assert r.row("ProposedTS", 16, 0.0).mean_rate > 0


@settings(max_examples=500, deadline=None)
@given(M=st.integers(2, 8), N=st.integers(1, 2), data=st.data())
def test_parallel_matches_serial(M, N, data):
    ks = tuple(data.draw(st.lists(st.integers(1, M), min_size=1, max_size=2)))
    modes = tuple(data.draw(st.lists(st.sampled_from(list(SimMode)[:6]), min_size=1, max_size=3, unique=True)))
    spec = ExperimentSpec(M, N, ks, (data.draw(st.floats(-10, 20)),), modes,
                          trials=data.draw(st.integers(1, 4)), master_seed=data.draw(st.integers(0, 2**63)))
    serial = run_monte_carlo(spec, workers=1, chunk_size=2)
    parallel = run_monte_carlo(spec, workers=3, chunk_size=1)
    assert serial == parallel


class TestReport:
    def make(self):
        return RateReport(
            [RateRow("CZF", 5, -10.0, 1.234567891234, 0.1, 20, 7), RateRow("CMF", 5, 0.0, 3.0, 0.0, 20, 7)],
            [AsymptoticRow("CZF", 5, -10.0, 1.2)],
        )

    def test_empty_csv_is_header_only(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report(RateReport(), "csv", path)
        assert path.read_text() == "mode,K,snr_db,mean_rate,std_rate,trials,seed\n"
        assert asymptotic_path(path).read_text() == "mode,K,snr_db,predicted_rate\n"

    def test_one_row(self, tmp_path):
        path = tmp_path / "r.csv"
        rep = RateReport([RateRow("CZF", 5, 10.0, 57.5, 1.25, 2000, 3)])
        emit_report(rep, "csv", path)
        lines = path.read_text().splitlines()
        assert lines == ["mode,K,snr_db,mean_rate,std_rate,trials,seed", "CZF,5,10,57.5,1.25,2000,3"]

    def test_nine_significant_digits(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report(self.make(), "csv", path)
        assert "1.23456789," in path.read_text()

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_round_trip(self, tmp_path, fmt):
        path = tmp_path / f"r.{fmt}"
        rep = self.make()
        emit_report(rep, fmt, path)
        back = read_report(path, fmt)
        rounded = [RateRow(r.mode, r.K, r.snr_db, float(f"{r.mean_rate:.9g}"), r.std_rate, r.trials, r.seed)
                   for r in rep.rows]
        assert back.rows == rounded
        assert back.asymptotic_rows == rep.asymptotic_rows

    def test_json_structure(self, tmp_path):
        path = tmp_path / "r.json"
        emit_report(self.make(), "json", path)
        data = json.loads(path.read_text())
        assert set(data) == {"rows", "asymptotic_rows", "infeasible"}
        assert list(data["rows"][0]) == ["mode", "K", "snr_db", "mean_rate", "std_rate", "trials", "seed"]


def run_cli(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


class TestCli:
    def test_intervals(self):
        code, text = run_cli("intervals", "--m", "16", "--n", "2", "--snr-db", "0")
        assert code == 0
        lines = text.strip().splitlines()
        assert len(lines) == 17
        for line in lines[1:]:
            K, mode, czf, cmf = line.split(",")
            K = int(K)
            ref_czf = modified_czf_rate(16, 2, K, 1.0, 1.0).value
            ref_cmf = modified_cmf_rate(16, 2, K, 1.0, 1.0).value
            assert mode == ("CZF" if ref_czf >= ref_cmf else "CMF")

    def test_optimal_streams(self):
        code, text = run_cli("optimal-streams", "--m", "64", "--snr-db", "0")
        assert code == 0
        values = dict(line.split("=") for line in text.strip().splitlines())
        assert float(values["L_real"]) == pytest.approx(64 / math.e, rel=1e-8)
        assert values["L_star"] == "24" and values["branch"] == "Interior"

    def test_asymptotic(self):
        code, text = run_cli("asymptotic", "--m", "16", "--n", "2", "--k-list", "1:16", "--snr-list-db=-10,0")
        assert code == 0
        assert len(text.strip().splitlines()) == 1 + 32

    def test_simulate_stdout(self):
        code, text = run_cli("simulate", "--m", "8", "--n", "2", "--k-list", "2", "--snr-list-db", "0",
                             "--modes", "czf,proposed", "--trials", "3")
        assert code == 0
        assert text.startswith("mode,K,snr_db,mean_rate,std_rate,trials,seed\n")

    def test_simulate_files(self, tmp_path):
        out = tmp_path / "sim.csv"
        code, _ = run_cli("simulate", "--m", "8", "--n", "2", "--k-list", "2,3", "--snr-list-db=-5,5",
                          "--modes", "bdzf,czf,cmf", "--trials", "2", "--out", str(out))
        assert code == 0
        assert len(read_report(out).rows) == 12
        assert asymptotic_path(out).exists()

    def test_simulate_json(self, tmp_path):
        out = tmp_path / "sim.json"
        code, _ = run_cli("simulate", "--m", "8", "--n", "2", "--k-list", "2", "--snr-list-db", "0",
                          "--trials", "2", "--format", "json", "--out", str(out))
        assert code == 0
        assert len(json.loads(out.read_text())["rows"]) == 3

    def test_user_sweep(self, tmp_path):
        out = tmp_path / "user_sweep.csv"
        code, _ = run_cli("user-sweep", "--trials", "20", "--oracle-trials", "2", "--out", str(out))
        assert code == 0
        rows = read_report(out).rows
        assert sorted(r.K for r in rows if r.mode == "ProposedTS") == list(range(1, 17))
        for mode in ("CZF", "CMF"):
            assert sorted(r.K for r in rows if r.mode == mode) == list(range(1, 9))
        assert sorted(r.K for r in rows if r.mode == "Oracle") == list(range(1, 9))

    def test_oracle_command(self):
        code, text = run_cli("oracle", "--m", "8", "--n", "2", "--k", "3", "--snr-db", "0", "--trials", "2")
        assert code == 0
        assert len(text.strip().splitlines()) == 3

    @pytest.mark.parametrize("argv", [
        ["simulate", "--m", "8"],
        ["simulate", "--m", "8", "--n", "2", "--k-list", "2", "--snr-list-db", "0", "--modes", "zf"],
        ["simulate", "--m", "8", "--n", "2", "--k-list", "20", "--snr-list-db", "0"],
        ["intervals", "--m", "x", "--n", "2", "--snr-db", "0"],
        ["nonsense"],
        [],
    ])
    def test_usage_errors(self, argv, capsys):
        code, _ = run_cli(*argv)
        assert code == 1

    def test_runtime_error(self):
        code, _ = run_cli("oracle", "--m", "16", "--n", "2", "--k", "8", "--snr-db", "0", "--max-evals", "10")
        assert code == 2

    def test_io_failure(self, tmp_path):
        code, _ = run_cli("simulate", "--m", "8", "--n", "2", "--k-list", "2", "--snr-list-db", "0",
                          "--trials", "1", "--out", str(tmp_path / "missing" / "x.csv"))
        assert code == 2

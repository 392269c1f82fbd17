"""Run configuration parsing, trace CSV round-trips, JSON reports."""

import json

import numpy as np
import pytest

from bilevopt import SolverConfig, geometric_schedule, make_toy, run
from bilevopt.exceptions import ConfigError
from bilevopt.traceio import (CSV_HEADER, csv_projection, execute,
                              parse_runspec, read_report_json,
                              read_trace_csv, report_envelope, rows_equal,
                              write_report_json, write_trace_csv)

MINIMAL = """\
schema_version = 1

[problem]
id = toy(a=0)

[solver]
id = bvfim

[schedule]
mode = geometric

[run]
seed = 0
K = 3
x0 = 0
y0 = 0
"""


class TestParse:
    def test_minimal_with_defaults(self):
        spec = parse_runspec(MINIMAL)
        assert spec.problem_id == "toy(a=0)"
        assert spec.solver_id == "bvfim"
        assert spec.K == 3
        assert spec.L == 1                      # default
        assert spec.record_every == 1           # default
        assert spec.solver_params == {}         # library defaults apply
        assert spec.schedule.mode == "geometric"

    def test_duplicate_key_reports_both_locations(self):
        text = MINIMAL + "K = 4\n"
        with pytest.raises(ConfigError) as err:
            parse_runspec(text)
        message = str(err.value)
        assert "duplicate" in message
        assert "first defined at line" in message

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_runspec(MINIMAL.replace("seed = 0", "sede = 0"))

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="unknown section"):
            parse_runspec(MINIMAL + "[extras]\nfoo = 1\n")

    def test_type_mismatch_has_line(self):
        bad = MINIMAL.replace("K = 3", "K = three")
        with pytest.raises(ConfigError, match="not a int"):
            parse_runspec(bad)

    def test_missing_required_key(self):
        bad = MINIMAL.replace("id = bvfim", "alpha = 0.01")
        with pytest.raises(ConfigError, match="missing required key"):
            parse_runspec(bad)

    def test_unknown_solver_and_problem(self):
        with pytest.raises(ConfigError, match="unknown solver"):
            parse_runspec(MINIMAL.replace("id = bvfim", "id = sgd"))
        with pytest.raises(ConfigError, match="unknown problem"):
            parse_runspec(MINIMAL.replace("toy(a=0)", "mnist"))

    def test_capability_check_at_parse_time(self):
        text = MINIMAL.replace("id = bvfim", "id = cg") \
                      .replace("toy(a=0)", "hyperclean(seed=0)")
        with pytest.raises(ConfigError, match="second-order"):
            parse_runspec(text)
        ok = text.replace("[solver]", "fd_second_order = true\n[solver]")
        spec = parse_runspec(ok)
        assert spec.fd_second_order

    def test_solver_key_applicability(self):
        bad = MINIMAL.replace("id = bvfim", "id = rhg\nT_z = 10")
        with pytest.raises(ConfigError, match="does not apply to solver"):
            parse_runspec(bad)

    def test_schedule_mode_key_applicability(self):
        bad = MINIMAL.replace("mode = geometric", "mode = geometric\nmu1 = 1.0")
        with pytest.raises(ConfigError, match="do not apply"):
            parse_runspec(bad)
        fixed = MINIMAL.replace(
            "mode = geometric",
            "mode = fixed\nmu1 = 1e-6\nmu2 = 1e-6\ntheta = 1e-6\ntau = 1e-6")
        assert parse_runspec(fixed).schedule.mode == "fixed"
        incomplete = MINIMAL.replace("mode = geometric",
                                     "mode = fixed\nmu1 = 1e-6")
        with pytest.raises(ConfigError, match="requires keys"):
            parse_runspec(incomplete)

    def test_schema_version_guard(self):
        with pytest.raises(ConfigError, match="schema_version"):
            parse_runspec(MINIMAL.replace("schema_version = 1",
                                          "schema_version = 99"))

    def test_execute_roundtrip(self):
        (x, y), trace = execute(parse_runspec(MINIMAL))
        assert len(trace) == 3

    def test_baseline_spec_executes(self):
        text = MINIMAL.replace("id = bvfim", "id = rhg\nT = 20\ns = 0.1")
        (x, y), trace = execute(parse_runspec(text))
        assert trace.counters.hvp_f_yy > 0


class TestTraceCsv:
    def _small_trace(self, K=2):
        config = SolverConfig(K=K)
        _, trace = run(make_toy(0.0), geometric_schedule(), config,
                       x0=[0.0], y0=[0.0])
        return trace

    def test_empty_trace_header_only(self, tmp_path):
        from bilevopt.traceio import Trace
        path = tmp_path / "empty.csv"
        write_trace_csv(Trace(), path)
        assert path.read_text() == ",".join(CSV_HEADER) + "\n"

    def test_row_count(self, tmp_path):
        trace = self._small_trace(K=2)
        path = tmp_path / "t.csv"
        write_trace_csv(trace, path)
        assert len(path.read_text().strip().splitlines()) == 3   # header + 2

    def test_roundtrip_bit_exact(self, tmp_path):
        trace = self._small_trace(K=5)
        path = tmp_path / "t.csv"
        write_trace_csv(trace, path)
        rows = read_trace_csv(path)
        assert rows_equal(rows, csv_projection(trace), ignore=())
        # writing the read-back values again is byte-identical
        path2 = tmp_path / "t2.csv"
        write_trace_csv(trace, path2)
        assert path.read_text() == path2.read_text()

    def test_seventeen_digit_floats_roundtrip(self, tmp_path):
        trace = self._small_trace(K=3)
        path = tmp_path / "t.csv"
        write_trace_csv(trace, path)
        rows = read_trace_csv(path)
        for rec, row in zip(trace.records, rows):
            assert row["F"] == rec.F            # exact equality, not approx
            assert row["grad_norm"] == rec.grad_norm

    def test_identical_runs_identical_csv_modulo_wall(self, tmp_path):
        t1 = self._small_trace(K=4)
        t2 = self._small_trace(K=4)
        assert rows_equal(csv_projection(t1), csv_projection(t2))

    def test_nan_dist_roundtrip(self, tmp_path):
        # problems without a known optimum record NaN distances
        from bilevopt import make_hyperclean
        p = make_hyperclean(d=5, classes=2, n_tr=20, n_val=20, n_test=20,
                            seed=0)
        _, trace = run(p, geometric_schedule(), SolverConfig(K=2, T_z=5,
                                                             T_y=5))
        path = tmp_path / "t.csv"
        write_trace_csv(trace, path)
        rows = read_trace_csv(path)
        assert np.isnan(rows[0]["dist_x"])
        assert rows_equal(rows, csv_projection(trace), ignore=())

    def test_io_error_has_path_context(self, tmp_path):
        with pytest.raises(OSError, match="no/such"):
            write_trace_csv(self._small_trace(), tmp_path / "no/such/t.csv")


class TestReports:
    def test_deterministic_ordering(self, tmp_path):
        payload = {"zeta": 1, "alpha": {"b": 2, "a": [3, 1]}}
        p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
        write_report_json(report_envelope(payload, "cfg"), p1)
        write_report_json(report_envelope(payload, "cfg"), p2)
        assert p1.read_bytes() == p2.read_bytes()
        keys = list(json.loads(p1.read_text()))
        assert keys == sorted(keys)

    def test_envelope_fields(self, tmp_path):
        path = tmp_path / "r.json"
        write_report_json(report_envelope({"x": 1}, "text"), path)
        data = read_report_json(path)
        assert set(data) >= {"config_sha256", "library_version", "platform",
                             "report"}
        assert data["report"] == {"x": 1}

    def test_roundtrip(self, tmp_path):
        payload = {"values": [1.5, 2.25], "name": "check"}
        path = tmp_path / "r.json"
        write_report_json(payload, path)
        assert read_report_json(path) == payload

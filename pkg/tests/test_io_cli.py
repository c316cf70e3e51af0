"""JSON schemas and the command-line interface."""

import json

import numpy as np
import pytest

import chanstruct as cs
from chanstruct.cli import main
from helpers import amplitude_damping_channel, planted_channel

RNG = np.random.default_rng(505)


def write_channel(path, ch, metadata=None):
    path.write_text(cs.canonical_dumps(cs.channel_to_dict(ch, metadata)))
    return str(path)


class TestChannelSchema:
    def test_round_trip_bytes(self):
        ch = amplitude_damping_channel(0.3)
        doc = cs.channel_to_dict(ch, {"name": "emblem"})
        text = cs.canonical_dumps(doc)
        ch2 = cs.channel_from_dict(json.loads(text))
        assert cs.canonical_dumps(cs.channel_to_dict(ch2, {"name": "emblem"})) == text
        assert np.abs(ch2.kraus[0] - ch.kraus[0]).max() == 0.0

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.pop("dim"),
            lambda d: d.pop("kraus"),
            lambda d: d.__setitem__("dim", "two"),
            lambda d: d.__setitem__("kraus", []),
            lambda d: d["kraus"][0].pop(0),             # missing row
            lambda d: d["kraus"][0][0].pop(0),          # short row
            lambda d: d["kraus"][0][0].__setitem__(0, [1.0]),       # bad pair
            lambda d: d["kraus"][0][0].__setitem__(0, "1"),         # bad entry
            lambda d: d.__setitem__("metadata", 7),
        ],
    )
    def test_schema_violations_raise_parse_error(self, mutate):
        doc = cs.channel_to_dict(amplitude_damping_channel(0.3))
        mutate(doc)
        with pytest.raises(cs.ParseError):
            cs.channel_from_dict(doc)

    def test_nonfinite_rejected(self):
        doc = cs.channel_to_dict(amplitude_damping_channel(0.3))
        doc["kraus"][0][0][0] = [float("inf"), 0.0]
        with pytest.raises(cs.ParseError):
            cs.channel_from_dict(doc)

    def test_validation_on_parse_unless_unchecked(self):
        doc = {
            "dim": 2,
            "kraus": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]] * 2,
        }
        with pytest.raises(cs.ArgumentError):
            cs.channel_from_dict(doc)
        ch = cs.channel_from_dict(doc, unchecked=True)
        assert not cs.validate(ch).trace_preserving


class TestReportSchema:
    def _report_file(self):
        ch, _ = planted_channel(RNG, [1], [(1, 2)], 1, n_kraus=2)
        return cs.report_file_from_report(cs.decompose(ch))

    def test_round_trip_bytes(self):
        rf = self._report_file()
        text = cs.canonical_dumps(cs.report_file_to_dict(rf))
        rf2 = cs.report_file_from_dict(json.loads(text))
        text2 = cs.canonical_dumps(cs.report_file_to_dict(rf2))
        assert text == text2
        assert rf2.fixed_space_dimension == rf.fixed_space_dimension
        assert rf2.report.dim == rf.report.dim

    def test_reload_verifies_orthonormality(self):
        rf = self._report_file()
        doc = cs.report_file_to_dict(rf)
        doc["recurrent_basis"][0][0] = [5.0, 0.0]
        with pytest.raises(cs.ParseError):
            cs.report_file_from_dict(doc)

    def test_reload_verifies_enclosure_predicate(self):
        ch = amplitude_damping_channel(0.3)
        rf = cs.report_file_from_report(cs.decompose(ch))
        doc = cs.report_file_to_dict(rf)
        # span{e2} is orthonormal but not an enclosure
        doc["alpha_blocks"][0]["enclosure"] = [[[0.0, 0.0]], [[1.0, 0.0]]]
        with pytest.raises(cs.ParseError, match="enclosure"):
            cs.report_file_from_dict(doc)


class TestCliValidate:
    def test_valid_channel(self, tmp_path, capsys):
        path = write_channel(tmp_path / "ch.json", amplitude_damping_channel(0.3))
        assert main(["validate", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["trace_preserving"] is True
        assert doc["passed"] is True

    def test_failing_channel(self, tmp_path, capsys):
        doc = {
            "dim": 2,
            "kraus": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]] * 2,
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        assert main(["validate", str(path)]) == 1
        out = json.loads(capsys.readouterr().out)
        assert out["trace_preserving"] is False

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["validate", str(path)]) == 2
        out = json.loads(capsys.readouterr().out)
        assert out["error"]["type"] == "ParseError"

    def test_missing_file(self, tmp_path):
        assert main(["validate", str(tmp_path / "absent.json")]) == 2


class TestCliDecompose:
    def test_report_and_determinism(self, tmp_path, capsys):
        ch, _ = planted_channel(RNG, [1], [(1, 2)], 0, n_kraus=2)
        path = write_channel(tmp_path / "ch.json", ch)
        out1 = tmp_path / "r1.json"
        out2 = tmp_path / "r2.json"
        assert main(["decompose", path, "--out", str(out1)]) == 0
        stdout1 = capsys.readouterr().out
        assert main(["decompose", path, "--out", str(out2)]) == 0
        stdout2 = capsys.readouterr().out
        assert stdout1 == stdout2
        assert out1.read_bytes() == out2.read_bytes()
        assert out1.read_text() == stdout1
        doc = json.loads(stdout1)
        assert doc["rng_seed"] == 0
        assert doc["fixed_space_dimension"] == 5
        rf = cs.report_file_from_dict(doc)
        assert len(rf.report.beta_blocks) == 1

    def test_amplitude_damping_transient_line(self, tmp_path, capsys):
        path = write_channel(tmp_path / "ch.json", amplitude_damping_channel(0.3))
        assert main(["decompose", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        frame = doc["transient_basis"]
        # D = span{e2}
        assert abs(frame[0][0][0]) < 1e-10 and abs(frame[0][0][1]) < 1e-10
        assert abs(abs(complex(*frame[1][0])) - 1.0) < 1e-10

    def test_identity_channel_counts(self, tmp_path, capsys):
        path = write_channel(
            tmp_path / "id3.json", cs.KrausChannel([np.eye(3)])
        )
        assert main(["decompose", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["alpha_blocks"] == []
        assert len(doc["beta_blocks"]) == 1
        assert len(doc["beta_blocks"][0]["enclosures"]) == 3
        assert doc["fixed_space_dimension"] == 9

    def test_non_tp_exits_1(self, tmp_path, capsys):
        doc = {
            "dim": 2,
            "kraus": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]] * 2,
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        assert main(["decompose", str(path)]) == 1
        out = json.loads(capsys.readouterr().out)
        assert "error" in out

    def test_tolerance_flags(self, tmp_path):
        path = write_channel(tmp_path / "ch.json", amplitude_damping_channel(0.3))
        assert main(["decompose", path, "--tol-rank", "1e-8"]) == 0
        assert main(["decompose", path, "--tol-rank", "-1.0"]) == 1


class TestCliBuild:
    def test_oqrw_dimension(self, tmp_path, capsys):
        out = tmp_path / "walk.json"
        code = main(
            [
                "build", "oqrw", "--p", "0.3", "--q", "0.3",
                "--sites", "5", "--out", str(out),
            ]
        )
        assert code == 0
        capsys.readouterr()
        doc = json.loads(out.read_text())
        assert doc["dim"] == 18
        ch = cs.channel_from_dict(doc)
        assert cs.validate(ch).trace_preserving

    def test_oqrw_rejects_large_p(self, capsys):
        code = main(["build", "oqrw", "--p", "0.6", "--q", "0.2", "--sites", "5"])
        assert code == 1
        assert "error" in json.loads(capsys.readouterr().out)

    def test_markov_two_cycle(self, tmp_path, capsys):
        mat = tmp_path / "p.json"
        mat.write_text(json.dumps([[0.0, 1.0], [1.0, 0.0]]))
        assert main(["build", "markov", "--matrix", str(mat)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["dim"] == 2
        assert len(doc["kraus"]) == 2

    def test_markov_bad_matrix_file(self, tmp_path):
        mat = tmp_path / "p.json"
        mat.write_text(json.dumps({"rows": []}))
        assert main(["build", "markov", "--matrix", str(mat)]) == 2
        mat.write_text(json.dumps([[0.5, 0.5], [0.4, 0.5]]))
        assert main(["build", "markov", "--matrix", str(mat)]) == 1


class TestCliQuery:
    def test_enclosure(self, tmp_path, capsys):
        path = write_channel(tmp_path / "ch.json", amplitude_damping_channel(0.3))
        assert main(["query", "enclosure", path, "--vector", "[1, 0]"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["dimension"] == 1
        assert main(["query", "enclosure", path, "--vector", "[0, 1]"]) == 0
        assert json.loads(capsys.readouterr().out)["dimension"] == 2

    def test_enclosure_complex_entries(self, tmp_path, capsys):
        path = write_channel(tmp_path / "ch.json", amplitude_damping_channel(0.3))
        code = main(
            ["query", "enclosure", path, "--vector", "[[0, 1], [0, 0]]"]
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)["dimension"] == 1

    def test_bad_vector_exits_2(self, tmp_path, capsys):
        path = write_channel(tmp_path / "ch.json", amplitude_damping_channel(0.3))
        assert main(["query", "enclosure", path, "--vector", "[1, 0, 0]"]) == 2
        capsys.readouterr()
        assert main(["query", "enclosure", path, "--vector", "nope"]) == 2

    def test_irreducible(self, tmp_path, capsys):
        p = np.zeros((3, 3))
        p[1, 0] = p[2, 1] = p[0, 2] = 1.0
        path = write_channel(tmp_path / "c3.json", cs.from_markov_chain(p))
        assert main(["query", "irreducible", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["irreducible"] is True
        assert doc["certificate"]["eigenvalue_1_multiplicity"] == 1

    def test_fixed_points_identity(self, tmp_path, capsys):
        path = write_channel(tmp_path / "id2.json", cs.KrausChannel([np.eye(2)]))
        assert main(["query", "fixed-points", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["dimension"] == 4
        assert len(doc["hermitian_basis"]) == 4

    def test_spectrum(self, tmp_path, capsys):
        # decohering 3-cycle: peripheral spectrum is the three cube roots
        # of unity (the coherence sector is annihilated in one step)
        p = np.zeros((3, 3))
        p[1, 0] = p[2, 1] = p[0, 2] = 1.0
        path = write_channel(tmp_path / "c3.json", cs.from_markov_chain(p))
        assert main(["query", "spectrum", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        values = [complex(re, im) for re, im in doc["peripheral_spectrum"]]
        assert len(values) == 3
        assert any(abs(z - 1.0) < 1e-8 for z in values)
        assert all(abs(z ** 3 - 1.0) < 1e-8 for z in values)

    def test_unchecked_flag(self, tmp_path, capsys):
        doc = {
            "dim": 2,
            "kraus": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]] * 2,
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        assert main(["query", "spectrum", str(path)]) == 1
        capsys.readouterr()
        assert main(["query", "spectrum", str(path), "--unchecked"]) == 0

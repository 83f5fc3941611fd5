import json

import pytest

from bottlenet.cli import main
from bottlenet.engine import load_trace
from bottlenet.network import load_topology


def write_scenario(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def generated_topology(tmp_path):
    out = tmp_path / "topo.json"
    assert main(["gen", "--kind", "generic", "--nodes", "15",
                 "--seed", "0", "--out", str(out)]) == 0
    return str(out)


class TestGen:
    def test_writes_loadable_topology(self, generated_topology):
        t = load_topology(generated_topology)
        assert len(t.nodes) == 15

    def test_same_seed_same_bytes(self, tmp_path):
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            main(["gen", "--kind", "dense", "--nodes", "20",
                  "--seed", "5", "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestRun:
    def test_minimal_scenario(self, tmp_path, generated_topology, capsys):
        config = write_scenario(tmp_path, {
            "seed": 11,
            "topology": {"file": generated_topology},
            "requests": [{"at": 1, "src": 0, "dest": 8}],
        })
        trace_out = tmp_path / "trace.jsonl"
        summary_out = tmp_path / "summary.json"
        dot_out = tmp_path / "net.dot"
        code = main(["run", "--config", config,
                     "--trace-out", str(trace_out),
                     "--summary-out", str(summary_out),
                     "--dot-out", str(dot_out)])
        assert code == 0
        trace = load_trace(str(trace_out))
        assert any(ev.kind == "RouteFound" for ev in trace.events)
        summary = json.loads(summary_out.read_text())
        assert summary["discoveries_succeeded"] == 1
        assert "penwidth=2" in dot_out.read_text()
        assert "discoveries_attempted" in capsys.readouterr().out

    def test_found_path_is_valid_simple_path(self, tmp_path, generated_topology):
        config = write_scenario(tmp_path, {
            "seed": 2,
            "topology": {"file": generated_topology},
            "random_requests": {"count": 1},
        })
        trace_out = tmp_path / "trace.jsonl"
        assert main(["run", "--config", config, "--trace-out", str(trace_out)]) == 0
        t = load_topology(generated_topology)
        for ev in load_trace(str(trace_out)).events:
            if ev.kind == "RouteFound":
                path = ev.data["path"]
                assert len(set(path)) == len(path)
                assert all(t.link_live(a, b) for a, b in zip(path, path[1:]))

    def test_missing_seed_names_the_field(self, tmp_path, generated_topology, capsys):
        config = write_scenario(tmp_path, {
            "topology": {"file": generated_topology},
        })
        assert main(["run", "--config", config]) == 2
        err = capsys.readouterr().err
        assert "seed" in err and "scenario.json" in err

    def test_generator_spec_inline(self, tmp_path):
        config = write_scenario(tmp_path, {
            "seed": 4,
            "topology": {"generator": {"kind": "dense", "nodes": 20, "seed": 1}},
            "requests": [{"at": 1, "src": 0, "dest": 9}],
        })
        assert main(["run", "--config", config]) == 0

    def test_relative_topology_path_resolves_against_config(self, tmp_path, generated_topology):
        config = write_scenario(tmp_path, {
            "seed": 11,
            "topology": {"file": "topo.json"},
            "requests": [{"at": 1, "src": 0, "dest": 8}],
        })
        assert main(["run", "--config", config]) == 0

    def test_bad_fault_op(self, tmp_path, generated_topology):
        config = write_scenario(tmp_path, {
            "seed": 1,
            "topology": {"file": generated_topology},
            "faults": [{"at": 5, "op": "explode_node", "node": 1}],
        })
        assert main(["run", "--config", config]) == 2


class TestSummarize:
    def test_recomputes_from_files(self, tmp_path, generated_topology, capsys):
        config = write_scenario(tmp_path, {
            "seed": 11,
            "topology": {"file": generated_topology},
            "requests": [{"at": 1, "src": 0, "dest": 8}],
        })
        trace_out = tmp_path / "trace.jsonl"
        main(["run", "--config", config, "--trace-out", str(trace_out)])
        capsys.readouterr()
        json_out = tmp_path / "summary.json"
        assert main(["summarize", "--trace", str(trace_out),
                     "--topology", generated_topology,
                     "--json-out", str(json_out)]) == 0
        out = capsys.readouterr().out
        assert "total_bottle_bytes" in out
        assert json.loads(json_out.read_text())["discoveries_succeeded"] == 1

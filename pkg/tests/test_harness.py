import csv
from pathlib import Path

import pytest

from relayqkd.cli import main
from relayqkd.harness import ConfigError, child_seed, expand_sweep, parse_config, run, sweep
from relayqkd.nodes import RelayMode


def write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_minimal_config_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, "[run]\nn_nodes = 3\nslots = 1000\nseed = 7\n"))
    assert (cfg.n_nodes, cfg.slots, cfg.seed) == (3, 1000, 7)
    assert cfg.transmittance == 1.0
    assert cfg.mode == RelayMode.naive()
    assert cfg.eve_link is None and cfg.eve() is None
    assert not cfg.is_sweep


def test_per_hop_list(tmp_path):
    cfg = parse_config(write(tmp_path, "[run]\nn_nodes = 3\nslots = 10\ntransmittance = 0.9, 0.8\n"))
    assert cfg.transmittance == (0.9, 0.8)


def test_per_hop_list_wrong_length(tmp_path):
    with pytest.raises(ConfigError) as err:
        parse_config(write(tmp_path, "[run]\nn_nodes = 4\nslots = 10\ntransmittance = 0.9, 0.8\n"))
    assert err.value.key == "transmittance"


@pytest.mark.parametrize("text, key", [
    ("[run]\nn_nodes = 3\nslots = 10\ncolour = red\n", "run.colour"),
    ("[run]\nn_nodes = 3\nslots = 10\n[extra]\na = 1\n", "[extra]"),
    ("[run]\nn_nodes = 3\nslots = zero\n", "run.slots"),
    ("[run]\nn_nodes = 3\n", "slots"),
    ("[run]\nn_nodes = 3\nslots = 0\n", "slots"),
    ("[run]\nn_nodes = 3\nslots = 5\neve_link = 2\n", "eve_link"),
    ("[run]\nn_nodes = 3\nslots = 5\nmode = delay:0\n", "run.mode"),
    ("[run]\nn_nodes = 3\nslots = 5\ntrace = maybe\n", "run.trace"),
    ("[run]\nn_nodes = 3\nslots = 5\n[sweep]\nseed = 1, 2\n", "sweep.seed"),
    ("n_nodes = 3\n", None),
])
def test_bad_configs_name_the_key(tmp_path, text, key):
    with pytest.raises(ConfigError) as err:
        parse_config(write(tmp_path, text))
    if key is not None:
        assert err.value.key == key


def test_overrides_win(tmp_path):
    cfg = parse_config(
        write(tmp_path, "[run]\nn_nodes = 3\nslots = 10\nmode = naive\n"),
        {"mode": "padding", "slots": "20", "seed": None},
    )
    assert cfg.mode == RelayMode.padding() and cfg.slots == 20 and cfg.seed == 0


def test_unknown_override_rejected():
    with pytest.raises(ConfigError):
        parse_config(overrides={"n_nodes": 3, "slots": 4, "speed": 1})


def test_sweep_children_and_seeds(tmp_path):
    cfg = parse_config(write(tmp_path, "[run]\nn_nodes = 3\nslots = 200\nseed = 5\n"
                                       "[sweep]\nn_nodes = 3, 4, 5\nmode = naive, padding\n"))
    children = expand_sweep(cfg)
    assert len(children) == 6
    seeds = [c.seed for _, c in children]
    assert len(set(seeds)) == 6
    assert seeds == [c.seed for _, c in expand_sweep(cfg)]
    for _, c in children:
        assert c.seed == child_seed(5, c.n_nodes, c.transmittance, c.mode)
        assert not c.is_sweep


def test_sweep_children_independent_of_other_axis_values():
    full = sweep(parse_config(overrides={"n_nodes": 3, "slots": 300, "seed": 1,
                                         "sweep_n_nodes": "3, 4", "sweep_mode": "naive, padding"}))
    part = sweep(parse_config(overrides={"n_nodes": 3, "slots": 300, "seed": 1,
                                         "sweep_n_nodes": "4", "sweep_mode": "padding"}))
    assert set(part) == {"n4_xi1_padding"}
    assert part["n4_xi1_padding"].to_text() == full["n4_xi1_padding"].to_text()


def test_sweep_parallel_equals_serial():
    cfg = parse_config(overrides={"n_nodes": 3, "slots": 300, "seed": 2, "sweep_transmittance": "1.0, 0.6"})
    serial = {k: v.to_text() for k, v in sweep(cfg).items()}
    parallel = {k: v.to_text() for k, v in sweep(cfg, workers=2).items()}
    assert serial == parallel


def test_sweep_outputs(tmp_path):
    cfg = parse_config(overrides={"n_nodes": 3, "slots": 100, "seed": 3, "output_dir": tmp_path / "sw",
                                  "sweep_mode": "naive, delay:4"})
    results = sweep(cfg)
    with open(tmp_path / "sw" / "sweep_index.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["child"] for r in rows] == list(results)
    for r in rows:
        assert (tmp_path / "sw" / r["summary"]).exists()
        assert int(r["seed"]) == results[r["child"]].seed


def test_run_is_deterministic(tmp_path):
    outs = []
    for k in range(2):
        cfg = parse_config(overrides={"n_nodes": 4, "slots": 2000, "transmittance": "0.8",
                                      "mode": "delay:5", "seed": 11, "trace": True,
                                      "output_dir": tmp_path / str(k)})
        run(cfg)
        outs.append([(tmp_path / str(k) / f).read_bytes() for f in ("summary.txt", "trace.csv")])
    assert outs[0] == outs[1]
    header = outs[0][1].decode().splitlines()[0]
    assert header == "timeslot,node,role,basis,origin,detected,resend_of"


def test_run_lossless_fractions():
    s = run(parse_config(overrides={"n_nodes": 3, "slots": 100_000, "seed": 12}))
    assert abs(s.naive_fraction - 0.25) <= 0.01
    s = run(parse_config(overrides={"n_nodes": 4, "slots": 100_000, "seed": 12}))
    assert abs(s.bridged_fraction - 0.5) <= 0.01


def test_cli_run(capsys):
    assert main(["run", "--nodes", "3", "--slots", "500", "--mode", "padding", "--seed", "4"]) == 0
    out = capsys.readouterr().out
    assert "mode = padding" in out and "chains = " in out


def test_cli_run_with_config_and_flag_override(tmp_path, capsys):
    cfg = write(tmp_path, "[run]\nn_nodes = 3\nslots = 100\nmode = naive\n")
    assert main(["run", "--config", str(cfg), "--batch-size", "3", "--out", str(tmp_path / "o"), "--trace"]) == 0
    assert "mode = delay:3" in capsys.readouterr().out
    assert (tmp_path / "o" / "trace.csv").exists()


def test_cli_config_error(capsys):
    assert main(["run", "--nodes", "3", "--slots", "10", "--transmittance", "0.5,0.5,0.5"]) == 2
    assert "transmittance" in capsys.readouterr().err


def test_cli_sweep(capsys):
    assert main(["sweep", "--nodes", "3", "--slots", "200", "--sweep-nodes", "3,4", "--sweep-mode", "naive,padding"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 4


def test_cli_enumerate(capsys):
    assert main(["enumerate", "--nodes", "3", "--list"]) == 0
    out = capsys.readouterr().out
    assert "XYX\tno key" in out and "useful_fraction = 3/4" in out
    assert main(["enumerate", "--nodes", "13"]) == 2


def test_cli_check_single(capsys):
    assert main(["check", "1", "8"]) == 0
    assert capsys.readouterr().out.count("[PASS]") == 2

import pytest

from trapdoor_bbs.cli import main
from trapdoor_bbs.task import read_dataset, read_key


def run(*argv):
    return main([str(a) for a in argv])


def usage_exit(capsys, *argv):
    with pytest.raises(SystemExit) as exc:
        run(*argv)
    return exc.value.code, capsys.readouterr().err


@pytest.fixture
def key_file(tmp_path):
    path = tmp_path / "key.v1"
    assert run("keygen", "--modulus-bits", 64, "--record-len", 400, "--rng-seed", 1, "--out", path) == 0
    return path


def test_keygen_writes_key_and_public(tmp_path, capsys):
    path = tmp_path / "key.v1"
    assert run("keygen", "--modulus-bits", 128, "--seed-len", 192, "--record-len", 768,
               "--out", path) == 0
    out = capsys.readouterr().out
    key, params = read_key(path)
    assert f"N={key.N:x}" in out and "rng_seed=0" in out
    assert (params.seed_len, params.record_len) == (192, 768)
    assert "p=" not in (tmp_path / "key.v1.pub").read_text()


def test_keygen_odd_modulus_is_usage_error(tmp_path, capsys):
    code, err = usage_exit(capsys, "keygen", "--modulus-bits", 5, "--out", tmp_path / "k")
    assert code == 2 and "even" in err


def test_keygen_toy_needs_flag(tmp_path, capsys):
    code, _ = usage_exit(capsys, "keygen", "--modulus-bits", 6, "--out", tmp_path / "k")
    assert code == 2
    assert run("keygen", "--modulus-bits", 6, "--seed-len", 4, "--record-len", 7, "--toy",
               "--out", tmp_path / "k") == 0
    assert read_key(tmp_path / "k")[0].N == 77


def test_keygen_is_deterministic(tmp_path):
    for name in ("a", "b"):
        run("keygen", "--modulus-bits", 64, "--rng-seed", 5, "--out", tmp_path / name)
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_gen_and_eval(tmp_path, key_file, capsys):
    data = tmp_path / "d.v1"
    assert run("gen", "--key", key_file, "--count-per-class", 50, "--rng-seed", 7, "--out", data) == 0
    assert len(data.read_text().splitlines()) == 101
    capsys.readouterr()
    assert run("eval", "--key", key_file, "--data", data, "--tolerance", 0, "--format", "flat") == 0
    out = capsys.readouterr().out
    assert "accuracy=1.000000" in out and "rng_seed=7" in out


def test_gen_no_prefix_and_dummy(tmp_path, key_file):
    data = tmp_path / "d.v1"
    run("gen", "--key", key_file, "--count-per-class", 20, "--no-prefix", "--dummy", "--out", data)
    ds = read_dataset(data)
    assert not ds.include_seed_prefix and ds.dummy_coordinate
    assert all(len(s.record) == 401 and s.record[-1] == s.label for s in ds.samples)


def test_eval_no_prefix_needs_prefix(tmp_path, key_file, capsys):
    data = tmp_path / "d.v1"
    run("gen", "--key", key_file, "--count-per-class", 5, "--no-prefix", "--out", data)
    assert run("eval", "--key", key_file, "--data", data) == 1
    assert "seed prefix" in capsys.readouterr().err


def test_classify_prints_labels(tmp_path, key_file, capsys):
    data = tmp_path / "d.v1"
    run("gen", "--key", key_file, "--count-per-class", 10, "--out", data)
    capsys.readouterr()
    assert run("classify", "--key", key_file, "--data", data) == 0
    predicted = capsys.readouterr().out.split()
    assert predicted == [str(s.label) for s in read_dataset(data).samples]


def test_classify_single_record(tmp_path, capsys):
    key = tmp_path / "k"
    run("keygen", "--modulus-bits", 6, "--seed-len", 4, "--record-len", 7, "--toy", "--out", key)
    capsys.readouterr()
    run("classify", "--key", key, "--record", "0000110", "--tolerance", 0)
    run("classify", "--key", key, "--record", "0000111", "--tolerance", 0)
    assert capsys.readouterr().out.split() == ["1", "0"]


def test_attack_report(tmp_path, key_file, capsys):
    data = tmp_path / "d.v1"
    run("gen", "--key", key_file, "--count-per-class", 5, "--dummy", "--out", data)
    capsys.readouterr()
    assert run("attack", "--data", data, "--classifier", "dummy", "--budget", 1,
               "--format", "flat") == 0
    out = capsys.readouterr().out
    assert "name=robust_budget1\naccuracy=0.000000" in out


def test_baseline_refuses_key(tmp_path, key_file, capsys):
    data = tmp_path / "d.v1"
    run("gen", "--key", key_file, "--count-per-class", 50, "--out", data)
    code, err = usage_exit(capsys, "baseline", "--data", data, "--key", key_file)
    assert code == 2 and "without the trapdoor" in err
    assert run("baseline", "--data", data) == 0
    out = capsys.readouterr().out
    assert "position_frequency" in out and "linear" in out


def test_margin_grid(capsys):
    assert run("margin", "--seed-len", 192, "--record-len", 768, "--d", "0,96") == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[-1].split()[:2] == ["96", "9.529e-50"]


def test_margin_rejects_distance_beyond_record(capsys):
    code, err = usage_exit(capsys, "margin", "--seed-len", 192, "--record-len", 768, "--d", 9216)
    assert code == 2 and "record_len" in err


def test_margin_exact_column(tmp_path, capsys):
    key = tmp_path / "k"
    run("keygen", "--modulus-bits", 6, "--seed-len", 3, "--record-len", 9, "--toy", "--out", key)
    capsys.readouterr()
    assert run("margin", "--key", key, "--exact", "--format", "flat") == 0
    out = capsys.readouterr().out
    assert out.count("exact=") == 10


def test_missing_file_is_runtime_error(tmp_path, capsys):
    assert run("eval", "--key", tmp_path / "nope", "--data", tmp_path / "nope") == 1


def test_bad_flag_is_usage_error(capsys):
    code, _ = usage_exit(capsys, "gen", "--count-per-class", "x")
    assert code == 2

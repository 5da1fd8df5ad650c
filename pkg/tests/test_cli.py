import logging

import numpy as np
import pytest

from cli.commands import main
from data_io.images import load_grayscale
from metrics.report import read_report
from tensor_core import layers

SMOKE_SETTINGS = """\
measurement_rate=0.25
block_size=4
mfe_channels=1
layers_per_channel=2
filters_per_layer=4
fusion_filters=4
epochs=2
batch_size=4
patch_size=8
patches_per_epoch=8
precision=float64
"""


@pytest.fixture
def smoke_config(tmp_path):
    path = tmp_path / "smoke.cfg"
    path.write_text(SMOKE_SETTINGS, encoding="utf-8")
    return path


@pytest.fixture
def trained(dataset, smoke_config, tmp_path):
    ckpt = tmp_path / "runs" / "smoke.ckpt"
    code = main(["train", "--config", str(smoke_config), "--train-manifest", str(dataset), "--out", str(ckpt)])
    assert code == 0
    return ckpt


# ============================================================
# USO
# ============================================================

@pytest.mark.parametrize("argv", [[], ["bogus"], ["train"], ["count-params", "--channels", "many"]])
def test_usage_errors_exit_2(argv):
    assert main(argv) == 2


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    assert "count-params" in capsys.readouterr().out


def test_missing_manifest_is_a_domain_error(tmp_path, caplog):
    missing = tmp_path / "absent.tsv"
    with caplog.at_level(logging.ERROR):
        assert main(["train", "--train-manifest", str(missing)]) == 1
    assert str(missing) in caplog.text


# ============================================================
# count-params
# ============================================================

@pytest.mark.parametrize("argv,expected", [
    (["--channels", "2"], "88,640"),
    (["--channels", "1"], "27,936"),
    (["--channels", "3"], "198,496"),
    (["--channels", "2", "--pattern", "conv"], "105,536"),
    (["--channels", "2", "--pattern", "dilated"], "55,872"),
])
def test_count_params(capsys, argv, expected):
    assert main(["count-params"] + argv) == 0
    assert capsys.readouterr().out.strip() == expected


def test_count_params_full_scope_is_larger(capsys):
    main(["count-params", "--channels", "2"])
    mfe = int(capsys.readouterr().out.strip().replace(",", ""))
    main(["count-params", "--channels", "2", "--scope", "full"])
    assert int(capsys.readouterr().out.strip().replace(",", "")) > mfe


def test_invalid_channel_count_is_a_domain_error():
    assert main(["count-params", "--channels", "4"]) == 1


# ============================================================
# train / reconstruct / eval
# ============================================================

def test_train_writes_checkpoint_and_history(trained):
    assert trained.exists()
    history = trained.with_name("smoke.ckpt.history.jsonl")
    assert len(history.read_text(encoding="utf-8").splitlines()) == 2


def test_train_is_deterministic(dataset, smoke_config, trained, tmp_path):
    again = tmp_path / "again.ckpt"
    assert main(["train", "--config", str(smoke_config), "--train-manifest", str(dataset),
                 "--out", str(again)]) == 0
    assert again.read_bytes() == trained.read_bytes()


def test_reconstruct_keeps_input_dims(dataset, trained, tmp_path):
    source = dataset.parent / "images" / "test_0.pgm"
    out = tmp_path / "recon" / "test_0.pgm"
    assert main(["reconstruct", "--checkpoint", str(trained), "--input", str(source), "--out", str(out)]) == 0
    assert load_grayscale(out).dims == (1, 1, 18, 13)


def test_reconstruct_default_output_and_mr_warning(dataset, trained, caplog):
    source = dataset.parent / "images" / "test_1.pgm"
    with caplog.at_level(logging.WARNING):
        code = main(["reconstruct", "--checkpoint", str(trained), "--input", str(source), "--mr", "0.5"])
    assert code == 0
    assert source.with_name("test_1_recon.pgm").exists()
    assert "ignored" in caplog.text


def test_eval_prints_report(dataset, trained, capsys, tmp_path):
    saved = tmp_path / "report.tsv"
    assert main(["eval", "--checkpoint", str(trained), "--manifest", str(dataset), "--out", str(saved)]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert len(lines) == 5
    assert lines[0].split("\t") == ["name", "mr", "psnr", "ssim", "ms"]
    assert lines[-1].startswith("MEAN\t0.25\t")
    report = read_report(out)
    assert [r.name for r in report.rows] == ["pic0", "pic1", "pic2"]
    assert saved.read_text(encoding="utf-8") == out


def test_corrupt_checkpoint_is_a_domain_error(dataset, tmp_path):
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"NOPE" + bytes(20))
    assert main(["eval", "--checkpoint", str(bad), "--manifest", str(dataset)]) == 1


# ============================================================
# verify
# ============================================================

def test_verify_passes(capsys):
    assert main(["verify", "--seeds", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.split("\t")[1] for line in lines] == ["gradients", "measurement-equivalence", "adjoint",
                                                        "dilation", "rip"]
    assert all(line.startswith("PASS\t") for line in lines)


def test_verify_detects_wrong_gradients(capsys, monkeypatch):
    real = layers.conv2d_backward

    def skewed(grad_out, cache):
        gx, gw, gb = real(grad_out, cache)
        return gx, gw * 1.5, gb

    monkeypatch.setattr(layers, "conv2d_backward", skewed)
    assert main(["verify", "--seeds", "1"]) == 1
    out = capsys.readouterr().out
    assert "FAIL\tgradients" in out
    assert "PASS\trip" in out


# ============================================================
# compare
# ============================================================

def test_compare_table(capsys):
    assert main(["compare", "--size", "32", "--repeats", "3", "--mr", "0.25"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "variant\tmfe_params\tms"
    rows = {line.split("\t")[0]: line.split("\t")[1] for line in lines[1:]}
    assert rows == {"msdcnn-2d": "55,872", "msdcnn-2": "88,640", "msdcnn-2c": "105,536",
                    "msdcnn-1": "27,936", "msdcnn-3": "198,496"}
    assert np.isfinite([float(line.split("\t")[2]) for line in lines[1:]]).all()


@pytest.mark.parametrize("argv", [["compare", "--size", "32", "--repeats", "2"],
                                  ["compare", "--seeds", "0"]])
def test_compare_rejects_bad_counts(argv):
    assert main(argv) == 2


def test_eval_rejects_two_repeats(dataset, tmp_path):
    assert main(["eval", "--checkpoint", str(tmp_path / "x.ckpt"), "--manifest", str(dataset),
                 "--repeats", "2"]) == 2


def test_compare_trains_every_variant_with_shared_plan(dataset, smoke_config, capsys):
    code = main(["compare", "--config", str(smoke_config), "--train-manifest", str(dataset),
                 "--size", "16", "--repeats", "3", "--seeds", "2"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "variant\tmfe_params\tms\tval_psnr\tval_ssim"
    rows = {line.split("\t")[0]: line.split("\t")[1:] for line in lines[1:]}
    assert set(rows) == {"msdcnn-2d", "msdcnn-2", "msdcnn-2c", "msdcnn-1", "msdcnn-3"}
    params = {name: int(values[0].replace(",", "")) for name, values in rows.items()}
    assert params["msdcnn-1"] < params["msdcnn-2"] < params["msdcnn-3"]
    assert params["msdcnn-2d"] < params["msdcnn-2"] < params["msdcnn-2c"]
    assert np.isfinite([float(values[2]) for values in rows.values()]).all()

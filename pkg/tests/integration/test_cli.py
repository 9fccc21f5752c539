"""
End-to-end tests of the command-line driver
"""
import pandas as pd
import pytest
import yaml
from click.testing import CliRunner

from src.cli.main import cli, exit_code_for, main
from src.common.exceptions import (
    CheckpointError,
    ConfigurationError,
    DatasetError,
    PositivityError,
    ShapeError,
    StorageError,
    TrainingError,
)
from src.common.models import NodeFamily
from src.ml.checkpoint import save_checkpoint
from src.ml.hednet import build_network
from src.storage import read_refine_plan

GEN_ARGS = ['gen-data', '--degree', '3', '--scale', '0.0002', '--no-validation', '--seed', '1', '--threads', '1']


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump({
        'logging': {'level': 'WARNING'},
        'solver': {'degree': 3},
        'indicator': {'kind': 'jump'},
        'training': {'batch_size': 8, 'epochs': 1},
    }))
    return str(path)


@pytest.fixture
def invoke(config_file):
    runner = CliRunner()

    def _invoke(*args):
        return runner.invoke(cli, ['--config', config_file, *[str(a) for a in args]])

    return _invoke


@pytest.fixture
def dataset(invoke, tmp_path):
    result = invoke(*GEN_ARGS, '--output', tmp_path / "data")
    assert result.exit_code == 0, result.output
    return tmp_path / "data" / "annsi_N3_gauss_train.bin"


@pytest.fixture
def sod_snapshot(invoke, tmp_path):
    out = tmp_path / "run"
    result = invoke('simulate', '--case', 'sod_strip', '--mesh', 8, 1, '--indicator', 'none',
                    '--t-end', 0.01, '--output-dir', out, '--threads', 1)
    assert result.exit_code == 0, result.output
    return out / "snapshot_00001.csv"


def test_exit_codes():
    assert exit_code_for(ConfigurationError("x")) == 1
    assert exit_code_for(ShapeError("x")) == 1
    assert exit_code_for(CheckpointError("x")) == 1
    assert exit_code_for(DatasetError("x")) == 1
    assert exit_code_for(PositivityError("x", element=1, time=0.1)) == 2
    assert exit_code_for(TrainingError("x")) == 2
    assert exit_code_for(StorageError("x")) == 2


class TestDescribe:

    def test_network_sizes(self, invoke):
        result = invoke('describe')
        assert result.exit_code == 0, result.output
        assert "72477 parameters" in result.output
        assert "74269 parameters" in result.output
        assert "sod_strip" in result.output

    def test_case(self, invoke):
        result = invoke('describe', '--case', 'forward_step')
        assert result.exit_code == 0
        assert "1050 elements" in result.output
        assert "flux hlle" in result.output

    def test_unknown_case(self, invoke):
        assert invoke('describe', '--case', 'nope').exit_code == 1

    def test_main_returns_exit_code(self, config_file):
        assert main(['--config', config_file, 'describe', '--case', 'nope']) == 1
        assert main(['--config', config_file, 'describe', '--case', 'sod_strip']) == 0


class TestDataAndTraining:

    def test_gen_data(self, invoke, tmp_path, dataset):
        assert dataset.exists()
        summary = (tmp_path / "data" / "annsi_N3_gauss_summary.txt").read_text()
        assert "training set: 39 samples" in summary
        assert not (tmp_path / "data" / "annsi_N3_gauss_val.bin").exists()

        # same seed, different thread count
        again = invoke(*GEN_ARGS[:-1], '2', '--output', tmp_path / "again")
        assert again.exit_code == 0, again.output
        assert (tmp_path / "again" / "annsi_N3_gauss_train.bin").read_bytes() == dataset.read_bytes()

        described = invoke('describe', '--dataset', dataset)
        assert "39 samples, N=3, gauss nodes" in described.output

    def test_zero_scale_is_usage_error(self, invoke, tmp_path):
        result = invoke('gen-data', '--degree', '3', '--scale', '0', '--output', tmp_path / "data")
        assert result.exit_code == 1

    def test_train_resume_and_eval(self, invoke, tmp_path, dataset):
        checkpoint = tmp_path / "models" / "annsi_N3.ckpt"
        history = tmp_path / "models" / "annsi_N3_history.csv"
        result = invoke('train', '--train', dataset, '--validation', dataset, '--output', checkpoint,
                        '--epochs', 1, '--threads', 1)
        assert result.exit_code == 0, result.output
        assert checkpoint.exists()
        assert pd.read_csv(history)['epoch'].tolist() == [1]

        described = invoke('describe', '--checkpoint', checkpoint)
        assert "72477 parameters" in described.output
        assert "epoch 1, optimizer yes" in described.output

        resumed = tmp_path / "models" / "resumed.ckpt"
        result = invoke('train', '--train', dataset, '--resume', checkpoint, '--output', resumed,
                        '--history', history, '--epochs', 1, '--threads', 1)
        assert result.exit_code == 0, result.output
        assert "epoch 2" in result.output
        assert pd.read_csv(history)['epoch'].tolist() == [1, 2]

        evaluated = invoke('eval', '--checkpoint', resumed, '--dataset', dataset, '--threads', 1)
        assert evaluated.exit_code == 0, evaluated.output
        assert "f1" in evaluated.output

    def test_missing_dataset(self, invoke, tmp_path):
        result = invoke('train', '--train', tmp_path / "absent.bin", '--output', tmp_path / "net.ckpt")
        assert result.exit_code == 1


class TestSimulation:

    def test_simulate_with_jump_indicator(self, invoke, tmp_path):
        out = tmp_path / "jump"
        result = invoke('simulate', '--case', 'sod_strip', '--mesh', 8, 1, '--indicator', 'jump',
                        '--t-end', 0.01, '--output-dir', out, '--format', 'csv', '--format', 'vtk',
                        '--threads', 1)
        assert result.exit_code == 0, result.output
        assert "sod_strip: t=0.01" in result.output
        assert (out / "snapshot_00001.csv").exists()
        assert (out / "snapshot_00001.vtk").exists()

    def test_annsi_needs_checkpoint(self, invoke, tmp_path):
        result = invoke('simulate', '--case', 'sod_strip', '--indicator', 'annsi', '--output-dir', tmp_path)
        assert result.exit_code == 1

    def test_unknown_case(self, invoke, tmp_path):
        result = invoke('simulate', '--case', 'nope', '--output-dir', tmp_path)
        assert result.exit_code == 1

    def test_wrong_degree_checkpoint(self, invoke, tmp_path):
        checkpoint = save_checkpoint(build_network(5), tmp_path / "n5.ckpt")
        result = invoke('simulate', '--case', 'sod_strip', '--indicator', 'annsi', '--annsi-checkpoint',
                        checkpoint, '--output-dir', tmp_path / "run")
        assert result.exit_code == 1


class TestOfflineAnalysis:

    def test_indicate(self, invoke, tmp_path, sod_snapshot):
        report_path = tmp_path / "report.csv"
        result = invoke('indicate', '--snapshot', sod_snapshot, '--output', report_path, '--threads', 1)
        assert result.exit_code == 0, result.output
        report = pd.read_csv(report_path)
        assert len(report) == 8
        assert {'modal_value', 'modal_flag', 'jump_value', 'jump_flag'} <= set(report.columns)

    def test_indicate_annsi_without_checkpoint(self, invoke, sod_snapshot):
        assert invoke('indicate', '--snapshot', sod_snapshot, '--indicator', 'annsi').exit_code == 1

    def test_refine_plan_needs_checkpoint(self, invoke, sod_snapshot):
        assert invoke('refine-plan', '--snapshot', sod_snapshot).exit_code == 1

    def test_refine_plan_without_fv_elements_is_empty(self, invoke, tmp_path, sod_snapshot):
        checkpoint = save_checkpoint(build_network(3, node_family=NodeFamily.EQUISPACED), tmp_path / "annsl.ckpt")
        plan_path = tmp_path / "plan.txt"
        result = invoke('refine-plan', '--snapshot', sod_snapshot, '--annsl-checkpoint', checkpoint,
                        '--output', plan_path, '--rerun', '--threads', 1)
        assert result.exit_code == 0, result.output
        assert "0 element(s) split" in result.output
        assert "empty plan" in result.output
        assert read_refine_plan(plan_path).is_empty()

    def test_refine_plan_family_mismatch(self, invoke, tmp_path, sod_snapshot):
        checkpoint = save_checkpoint(build_network(3), tmp_path / "annsi.ckpt")
        result = invoke('refine-plan', '--snapshot', sod_snapshot, '--annsl-checkpoint', checkpoint)
        assert result.exit_code == 1

"""
Tests for configuration loading and validation
"""
import pytest
import yaml
from pydantic import ValidationError

from src.common.config import (
    Config,
    IndicatorConfig,
    RunConfig,
    TrainConfig,
    load_datagen_config,
    load_indicator_config,
    load_run_config,
    load_train_config,
)
from src.common.exceptions import ConfigurationError
from src.common.models import IndicatorKind, NodeFamily


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump({
        'solver': {'degree': 3, 'cfl': 0.5},
        'indicator': {
            'kind': 'modal',
            'thresholds': {'modal': {'upper': -4.0, 'lower': -4.2}},
        },
        'training': {'epochs': 7},
        'datagen': {'degree': 7, 'node_family': 'equispaced', 'table': 'annsl'},
        'storage': {'output_path': str(tmp_path / "out"), 'snapshot_formats': ['csv', 'vtk']},
    }))
    return str(path)


class TestConfig:

    def test_dot_notation(self, config_file):
        config = Config(config_file)
        assert config.get('solver.cfl') == 0.5
        assert config.get('solver.missing', 'fallback') == 'fallback'
        assert config.section('training') == {'epochs': 7}
        assert config.section('absent') == {}

    def test_environment_override(self, config_file, monkeypatch):
        monkeypatch.setenv('SOLVER_CFL', '0.3')
        config = Config(config_file)
        assert config.get_float('solver.cfl') == 0.3

    def test_get_float_falls_back_on_bad_value(self, config_file, monkeypatch):
        monkeypatch.setenv('REFINEMENT_BASE', 'steep')
        config = Config(config_file)
        assert config.get_float('refinement.base', 1.7) == 1.7
        assert config.get_float('refinement.absent', 2.5) == 2.5

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            Config(str(tmp_path / "absent.yaml"))


class TestIndicatorConfig:

    @pytest.mark.parametrize("kind, upper, lower", [
        (IndicatorKind.MODAL, -4.5, -4.7),
        (IndicatorKind.JUMP, 0.012, 0.01),
        (IndicatorKind.ANNSI, 0.5, 0.5),
    ])
    def test_default_thresholds(self, kind, upper, lower):
        config = IndicatorConfig(kind=kind)
        assert (config.upper, config.lower) == (upper, lower)

    def test_default_kind(self):
        assert IndicatorConfig().kind == IndicatorKind.ANNSI

    def test_lower_above_upper_rejected(self):
        with pytest.raises(ValidationError):
            IndicatorConfig(kind=IndicatorKind.JUMP, upper=0.01, lower=0.02)

    def test_unknown_variable(self):
        with pytest.raises(ValidationError):
            IndicatorConfig(kind=IndicatorKind.JUMP, variable="entropy")

    def test_thresholds_section(self, config_file):
        config = load_indicator_config(Config(config_file))
        assert config.kind == IndicatorKind.MODAL
        assert (config.upper, config.lower) == (-4.0, -4.2)

    def test_overrides_win(self, config_file):
        config = load_indicator_config(Config(config_file), kind='jump')
        assert config.kind == IndicatorKind.JUMP
        assert (config.upper, config.lower) == (0.012, 0.01)


class TestTrainConfig:

    def test_defaults(self):
        config = TrainConfig()
        assert config.batch_size == 500
        assert config.epochs == 120
        assert config.learning_rate == 0.01
        assert config.lr_decay_every == 15
        assert config.lr_decay_factor == 0.5
        assert config.lam == 1.1

    @pytest.mark.parametrize("epoch, expected", [(1, 0.01), (15, 0.01), (16, 0.005), (31, 0.0025)])
    def test_learning_rate_schedule(self, epoch, expected):
        assert TrainConfig().learning_rate_at(epoch) == pytest.approx(expected)

    def test_bad_values(self):
        with pytest.raises(ConfigurationError):
            load_train_config(Config(), batch_size=1)
        with pytest.raises(ConfigurationError):
            load_train_config(Config(), loss_convention="focal")

    def test_file_values(self, config_file):
        assert load_train_config(Config(config_file)).epochs == 7
        assert load_train_config(Config(config_file), epochs=2).epochs == 2


class TestRunConfig:

    def test_annsi_requires_checkpoint(self):
        with pytest.raises(ValidationError):
            RunConfig()
        assert RunConfig(annsi_checkpoint="net.ckpt").indicator.kind == IndicatorKind.ANNSI

    def test_unknown_format(self):
        with pytest.raises(ConfigurationError):
            load_run_config(Config(), indicator={'kind': 'jump'}, output_formats=['hdf5'])

    def test_sections_merged(self, config_file, tmp_path):
        run = load_run_config(Config(config_file), case='sod_strip')
        assert run.degree == 3
        assert run.cfl == 0.5
        assert run.case == 'sod_strip'
        assert run.indicator.kind == IndicatorKind.MODAL
        assert run.output_dir == str(tmp_path / "out")
        assert run.output_formats == ['csv', 'vtk']

    def test_default_run_needs_checkpoint(self):
        with pytest.raises(ConfigurationError):
            load_run_config(Config())


class TestDataGenConfig:

    def test_file_values(self, config_file):
        config = load_datagen_config(Config(config_file))
        assert config.degree == 7
        assert config.node_family == NodeFamily.EQUISPACED
        assert config.table == 'annsl'

    def test_invalid(self):
        with pytest.raises(ConfigurationError):
            load_datagen_config(Config(), table='other')
        with pytest.raises(ConfigurationError):
            load_datagen_config(Config(), degree=2)

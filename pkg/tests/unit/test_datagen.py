"""
Tests for synthetic data generation: families, sampling, labeling and dataset files
"""
import numpy as np
import pytest

from src.common.config import Config, load_datagen_config
from src.common.exceptions import ConfigurationError, DatasetError
from src.common.models import NodeFamily
from src.datagen.dataset import (
    DatasetBuilder,
    class_balance,
    dataset_summary,
    default_counts,
    read_dataset,
    split_targets,
    validate_targets,
    write_dataset,
)
from src.datagen.families import Curve, FamilySample, draw_family
from src.datagen.labeling import crossing_map, jump_condition, label_edge_map
from src.datagen.sampling import ElementSample, node_positions, normalize, sample_to_elements

GAUSS_N1 = np.array([-1.0, 1.0]) / np.sqrt(3.0)


def single_element(values, nodes=GAUSS_N1):
    return ElementSample(values=np.asarray(values, dtype=np.float64), x_nodes=nodes, y_nodes=nodes,
                         bounds=(-1.0, 1.0, -1.0, 1.0))


class TestNormalize:

    @pytest.mark.parametrize("values, expected", [
        ([-1.0, 0.0, 1.0], [0.0, 0.5, 1.0]),
        ([0.2, 0.5], [0.2, 0.5]),
        ([0.0, 4.0], [0.0, 1.0]),
        ([2.0, 3.0], [2.0 / 3.0, 1.0]),
    ])
    def test_examples(self, values, expected):
        np.testing.assert_allclose(normalize(np.array(values)), expected)

    def test_idempotent(self, rng):
        once = normalize(rng.normal(0.0, 3.0, (6, 6)))
        np.testing.assert_array_equal(normalize(once), once)
        assert once.min() >= 0.0
        assert once.max() <= 1.0


class TestFamilies:

    def test_linear_family_is_affine(self, rng):
        sample = draw_family(1, rng, 5)
        x = np.linspace(-1.0, 1.0, 7)
        X, Y = np.meshgrid(x, x, indexing='ij')
        values = sample.evaluate(X, Y)
        np.testing.assert_allclose(np.diff(values, 2, axis=0), 0.0, atol=1e-14)
        np.testing.assert_allclose(np.diff(values, 2, axis=1), 0.0, atol=1e-14)

    def test_oscillation_frequency_capped(self, rng):
        for _ in range(50):
            assert draw_family(2, rng, 5).params['n_f'] <= 2

    def test_non_smooth_families_carry_curves(self, rng):
        for family in (4, 5, 6):
            assert draw_family(family, rng, 5).curves
        assert draw_family(7, rng, 5).curves == []

    def test_unknown_family(self, rng):
        with pytest.raises(ConfigurationError):
            draw_family(8, rng, 5)

    def test_curve_roots(self):
        curve = Curve(c00=-0.25, c20=1.0)
        np.testing.assert_allclose(sorted(curve.roots_at_y(0.3)), [-0.5, 0.5])
        assert curve.roots_at_x(0.0).size == 0


class TestSampling:

    def test_linear_projection_exact(self, rng):
        sample = draw_family(1, rng, 3)
        sample.n_elements = 2
        elements = sample_to_elements(sample, 3, NodeFamily.GAUSS)
        assert len(elements) == 4
        for element in elements:
            X, Y = np.meshgrid(element.x_nodes, element.y_nodes, indexing='ij')
            np.testing.assert_allclose(element.values, sample.evaluate(X, Y), atol=1e-12)

    def test_equispaced_pixels_are_subcell_means(self):
        np.testing.assert_allclose(node_positions(3, NodeFamily.EQUISPACED), [-0.75, -0.25, 0.25, 0.75])
        sample = FamilySample(family=1, params={}, n_elements=1, evaluate=lambda x, y: 0.5 * x + 0.1)
        element = sample_to_elements(sample, 3, NodeFamily.EQUISPACED)[0]
        # means of an affine function equal its value at the sub-cell centers
        np.testing.assert_allclose(element.values[:, 0], 0.5 * np.array([-0.75, -0.25, 0.25, 0.75]) + 0.1)


class TestLabeling:

    def test_kink_between_gauss_nodes(self):
        curve = Curve(c00=0.0, c10=1.0, strength=1.0)
        sample = FamilySample(family=5, params={}, n_elements=1, evaluate=lambda x, y: np.abs(x), curves=[curve])
        element = single_element(np.full((2, 2), 1.0 / np.sqrt(3.0)))
        Y, cls = label_edge_map(sample, element)
        np.testing.assert_array_equal(Y, np.ones((2, 2)))
        assert cls == 1

    def test_vertical_line_has_no_y_crossings(self):
        curve = Curve(c00=0.0, c10=1.0)
        nodes = np.linspace(-0.9, 0.9, 4)
        element = ElementSample(np.zeros((4, 4)), nodes, nodes, (-1.0, 1.0, -1.0, 1.0))
        labels = crossing_map(curve, element)
        assert labels[1:3].all()
        assert not labels[[0, 3]].any()

    def test_small_jump_is_class_zero(self):
        sample = FamilySample(family=4, params={}, n_elements=1, evaluate=None, curves=[Curve(c00=0.0, c10=1.0)])
        element = single_element([[0.5, 0.5], [0.52, 0.52]])
        Y, cls = label_edge_map(sample, element)
        assert cls == 0
        assert not Y.any()

    def test_weak_ramp_is_class_zero(self):
        curve = Curve(c00=0.0, c10=1.0, strength=0.01)
        sample = FamilySample(family=6, params={}, n_elements=1, evaluate=None, curves=[curve])
        Y, cls = label_edge_map(sample, single_element(np.full((2, 2), 0.5)))
        assert cls == 0

    def test_gibbs_marks_peak(self):
        sample = FamilySample(family=7, params={}, n_elements=1, evaluate=None)
        values = np.array([[0.1, 0.2], [0.9, 0.3]])
        Y, cls = label_edge_map(sample, single_element(values))
        np.testing.assert_array_equal(Y, [[0, 0], [1, 0]])
        assert cls == 1

    def test_smooth_families_never_labeled(self, rng):
        for family in (1, 2, 3):
            sample = draw_family(family, rng, 3)
            sample.n_elements = 1
            for element in sample_to_elements(sample, 3, NodeFamily.GAUSS):
                Y, cls = label_edge_map(sample, element)
                assert cls == 0
                assert not Y.any()

    def test_jump_condition(self):
        assert jump_condition(np.array([0.0, 1.0]), 0.1)
        assert not jump_condition(np.array([0.005, 0.001]), 0.1)


class TestDatasets:

    TARGETS = {1: (3, 0), 5: (0, 3)}

    def test_builder_deterministic(self):
        first = DatasetBuilder(3, NodeFamily.GAUSS, seed=5).build(self.TARGETS)
        second = DatasetBuilder(3, NodeFamily.GAUSS, seed=5).build(self.TARGETS)
        np.testing.assert_array_equal(first.X, second.X)
        np.testing.assert_array_equal(first.Y, second.Y)
        assert first.families.tolist() == [1, 1, 1, 5, 5, 5]
        assert first.classes.tolist() == [0, 0, 0, 1, 1, 1]

    def test_thread_count_does_not_change_result(self):
        single = DatasetBuilder(3, NodeFamily.GAUSS, seed=2, threads=1).build(self.TARGETS)
        pooled = DatasetBuilder(3, NodeFamily.GAUSS, seed=2, threads=3).build(self.TARGETS)
        np.testing.assert_array_equal(single.X, pooled.X)
        np.testing.assert_array_equal(single.Y, pooled.Y)

    def test_samples_are_normalized(self):
        samples = DatasetBuilder(3, NodeFamily.EQUISPACED, seed=1).build(self.TARGETS)
        assert samples.X.dtype == np.float32
        assert samples.X.min() >= 0.0
        assert samples.X.max() <= 1.0 + 1e-6
        assert np.array_equal(samples.classes, samples.Y.reshape(len(samples), -1).any(axis=1))

    def test_file_round_trip(self, tmp_path, small_sample_set):
        path = write_dataset(small_sample_set, tmp_path / "train.bin")
        loaded = read_dataset(path, expected_degree=3, expected_family=NodeFamily.GAUSS)
        np.testing.assert_array_equal(loaded.X, small_sample_set.X)
        np.testing.assert_array_equal(loaded.Y, small_sample_set.Y)
        np.testing.assert_array_equal(loaded.families, small_sample_set.families)

    def test_file_errors(self, tmp_path, small_sample_set):
        path = write_dataset(small_sample_set, tmp_path / "train.bin")
        with pytest.raises(DatasetError):
            read_dataset(path, expected_degree=5)
        with pytest.raises(DatasetError):
            read_dataset(path, expected_family=NodeFamily.EQUISPACED)
        truncated = tmp_path / "short.bin"
        truncated.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(DatasetError):
            read_dataset(truncated)
        with pytest.raises(DatasetError):
            read_dataset(tmp_path / "missing.bin")

    def test_summary_and_balance(self, small_sample_set):
        summary = dataset_summary(small_sample_set)
        assert summary.loc['total', 'class_0'] == 4
        assert summary.loc['total', 'class_1'] == 4
        assert class_balance(small_sample_set) == 0.0

    def test_targets(self):
        counts = default_counts("annsi", 5)
        assert counts[2] == (66288, 0, 6638, 0)
        assert split_targets(counts, 0.001, validation=False)[4] == (0, 37)
        assert split_targets(counts, 0.001, validation=True)[4] == (0, 4)
        with pytest.raises(ConfigurationError):
            validate_targets({1: (0, 2)})
        with pytest.raises(ConfigurationError):
            validate_targets({4: (0, 0)})

    def test_zero_scale_rejected(self):
        with pytest.raises(ConfigurationError):
            load_datagen_config(Config(), scale=0)

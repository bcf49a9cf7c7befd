"""Unit tests for the prior, training sets and prevision models."""

import os

import numpy as np
from pydantic import ValidationError
import pytest

from biasnet.engine import PARAM_NAMES, ModelSpec
from biasnet.errors import ArtifactFormatError, InvalidArgumentError, SchemaMismatchError
from biasnet.features import FEATURE_NAMES
from biasnet.forest import ForestConfig
from biasnet.graph import DiGraph
from biasnet.prevision import (
    DICHOTOMIZED,
    MANIFEST_FILE,
    UNDICHOTOMIZED,
    DrawTask,
    PrevisionConfig,
    PrevisionModel,
    PriorSpec,
    generate_paired_training_set,
    generate_training_set,
    posterior_summary,
    read_manifest,
    restricted_selector_mask,
    sample_prior,
    sample_prior_matrix,
    selector_oob_accuracy,
    simulate_draw,
    train_class_selector,
    train_prevision,
)


@pytest.mark.unit
class TestPrior:
    """Test the spike-and-slab prior."""

    def test_component_defaults(self):
        """Shared spike for closure terms, spike-free slab for d."""
        prior = PriorSpec(n=41)
        d = prior.component("d")

        assert prior.component("pi").spike == 0.5
        assert d.spike == 0.0
        assert d.mean == pytest.approx(10 / 40)
        assert d.a + d.b == pytest.approx(5.0)

    def test_monte_carlo_means(self):
        """Sample means agree with the analytic mixture means."""
        prior = PriorSpec(n=41, spike_overrides={"delta": 0.8})
        draws = sample_prior_matrix(prior, 20000, np.random.default_rng(4))

        for col, name in enumerate(PARAM_NAMES):
            expected = prior.component(name).mean
            se = draws[:, col].std() / np.sqrt(len(draws))
            assert abs(draws[:, col].mean() - expected) < 4 * se

    def test_spike_frequency(self):
        """About half the closure draws are exactly zero; d never is."""
        draws = sample_prior_matrix(PriorSpec(n=41), 10000, np.random.default_rng(5))
        zero_share = (draws == 0.0).mean(axis=0)

        assert zero_share[PARAM_NAMES.index("d")] == 0.0
        assert abs(zero_share[PARAM_NAMES.index("pi")] - 0.5) < 0.03

    def test_single_draw_is_param_vector(self):
        """One draw validates as a parameter vector and is reproducible."""
        prior = PriorSpec(n=20, target_mean_degree=4)
        a = sample_prior(prior, np.random.default_rng(1))
        b = sample_prior(prior, np.random.default_rng(1))

        assert a == b
        assert 0.0 < a.d < 1.0

    def test_mean_degree_above_order(self):
        """A target mean degree of at least N - 1 has no valid slab."""
        with pytest.raises(InvalidArgumentError):
            PriorSpec(n=11).d_slab()

    def test_unknown_override(self):
        """Overrides must name a spiked parameter."""
        with pytest.raises(ValidationError):
            PriorSpec(n=20, spike_overrides={"d": 0.5})

    def test_fingerprint_tracks_settings(self):
        """Changing a setting changes the fingerprint."""
        assert PriorSpec(n=20).fingerprint() == PriorSpec(n=20).fingerprint()
        assert PriorSpec(n=20).fingerprint() != PriorSpec(n=21).fingerprint()


@pytest.mark.unit
class TestTrainingSet:
    """Test simulated training sets."""

    def test_paired_shapes(self, tiny_training):
        """One parameter row and one feature row per class for every draw."""
        assert tiny_training.params.shape == (80, len(PARAM_NAMES))
        for matrix in tiny_training.features.values():
            assert matrix.shape == (80, len(FEATURE_NAMES))
            assert np.all(np.isfinite(matrix))

    def test_draw_is_deterministic(self):
        """A draw depends only on (seed, draw_id)."""
        prior = PriorSpec(n=8, target_mean_degree=2)
        task = DrawTask(seed=3, draw_id=7, prior=prior, specs=(ModelSpec(n=8),), burnin=200)
        psi_a, rows_a, _ = simulate_draw(task)
        psi_b, rows_b, _ = simulate_draw(task)

        assert np.array_equal(psi_a, psi_b)
        assert np.array_equal(rows_a[0], rows_b[0])

    def test_workers_do_not_change_rows(self):
        """Serial and two-process generation give the same matrices."""
        prior = PriorSpec(n=8, target_mean_degree=2)
        spec = ModelSpec(n=8)
        serial = generate_training_set(prior, 6, spec, 300, seed=2, threads=1)
        pooled = generate_training_set(prior, 6, spec, 300, seed=2, threads=2)

        assert np.array_equal(serial[0], pooled[0])
        assert np.array_equal(serial[1], pooled[1])

    def test_zero_bias_densities_follow_d(self):
        """With every spike forced, graph density tracks the drawn d."""
        prior = PriorSpec(
            n=10,
            target_mean_degree=3,
            spike_overrides=dict.fromkeys(("pi", "sigma", "rho", "delta"), 1.0),
        )
        params, features = generate_training_set(prior, 20, ModelSpec(n=10), 50 * 100, seed=8)
        density = features[:, FEATURE_NAMES.index("Den")]

        assert np.all(params[:, [0, 1, 2, 4]] == 0.0)
        assert np.corrcoef(params[:, 3], density)[0, 1] > 0.8

    @pytest.mark.parametrize(
        "specs",
        [[], [ModelSpec(n=8), ModelSpec(n=8)], [ModelSpec(n=9)]],
    )
    def test_bad_specs(self, specs):
        """Specs must be distinct classes of the prior's order."""
        with pytest.raises(InvalidArgumentError):
            generate_paired_training_set(PriorSpec(n=8, target_mean_degree=2), 2, specs, 10, 0)

    def test_zero_draws(self):
        """At least one draw is needed."""
        with pytest.raises(InvalidArgumentError):
            generate_training_set(PriorSpec(n=8, target_mean_degree=2), 0, ModelSpec(n=8), 10, 0)


@pytest.mark.unit
class TestPrevisionModel:
    """Test forest-based posterior summaries."""

    def test_summary_structure(self, tiny_model, tiny_training):
        """Every parameter gets a mean, non-negative sd and sorted quantiles."""
        summaries, diagnostics = tiny_model.summarize(tiny_training.features["undichotomized"][:5])

        assert len(summaries) == 5
        assert diagnostics.rows == 5
        for summary in summaries:
            assert set(summary.parameters) == set(PARAM_NAMES)
            for post in summary.parameters.values():
                assert 0.0 <= post.mean <= 1.0
                assert post.sd >= 0.0
                assert post.quantiles == sorted(post.quantiles)
            low, high = summary.interval("d")
            assert low <= high

    def test_degenerate_prior(self, rng):
        """Constant parameters give point-mass posteriors."""
        features = rng.random((60, len(FEATURE_NAMES)))
        params = np.tile([0.0, 0.0, 0.0, 0.2, 0.0], (60, 1))
        model = train_prevision(
            params,
            features,
            PrevisionConfig(forest=ForestConfig(n_trees=10)),
            ModelSpec(n=12),
            PriorSpec(n=12, target_mean_degree=3),
        )
        summary = model.summarize(features[:1])[0][0]

        assert summary.parameters["d"].mean == pytest.approx(0.2)
        assert summary.parameters["d"].sd == pytest.approx(0.0, abs=1e-6)
        assert set(summary.parameters["d"].quantiles) == {0.2}

    def test_training_is_reproducible(self, tiny_training):
        """The same seed gives identical forests."""
        cfg = PrevisionConfig(forest=ForestConfig(n_trees=5), seed=13)
        args = (tiny_training.params, tiny_training.features["undichotomized"], cfg)
        spec, prior = ModelSpec(n=12), PriorSpec(n=12, target_mean_degree=3)
        a = train_prevision(*args, spec, prior)
        b = train_prevision(*args, spec, prior)
        x = tiny_training.features["undichotomized"][:10]

        assert a.summarize(x)[0] == b.summarize(x)[0]

    def test_forest_seeds_differ_per_role(self):
        """Each (parameter, role) forest gets its own seed."""
        cfg = PrevisionConfig(seed=1)
        roles = ("mean", "square", "quantile")
        seeds = {cfg.forest_config(k, role).seed for k in range(5) for role in roles}

        assert len(seeds) == 15

    def test_mismatched_rows(self, rng):
        """Parameter and feature rows must agree."""
        with pytest.raises(InvalidArgumentError):
            train_prevision(
                rng.random((10, 5)),
                rng.random((9, len(FEATURE_NAMES))),
                PrevisionConfig(),
                ModelSpec(n=12),
                PriorSpec(n=12, target_mean_degree=3),
            )

    def test_posterior_summary_of_graph(self, tiny_model):
        """A graph is featurized and summarized in one call."""
        g = DiGraph.from_edges(12, [(k, (k + 1) % 12) for k in range(12)])
        summary = posterior_summary(tiny_model, g)

        assert summary.model_class == "undichotomized"
        assert summary.undichotomized_probability is None

    def test_save_and_load(self, tmp_path, tiny_model, tiny_training):
        """A reloaded model gives identical summaries."""
        manifest = tiny_model.save(tmp_path / "model")
        loaded = PrevisionModel.load(tmp_path / "model", tiny_model.schema_hash)
        x = tiny_training.features["undichotomized"][:4]

        assert manifest.training_rows == 80
        assert read_manifest(tmp_path / "model").schema_hash == tiny_model.schema_hash
        assert loaded.summarize(x)[0] == tiny_model.summarize(x)[0]

    def test_load_checks_schema(self, tmp_path, tiny_model):
        """A caller expecting another schema is refused."""
        tiny_model.save(tmp_path / "model")

        with pytest.raises(SchemaMismatchError):
            PrevisionModel.load(tmp_path / "model", expected_schema_hash="0" * 16)

    def test_load_without_manifest(self, tmp_path):
        """An empty directory is not a model."""
        with pytest.raises(ArtifactFormatError):
            PrevisionModel.load(tmp_path)

    def test_corrupt_manifest(self, tmp_path, tiny_model):
        """Unparseable manifests are format errors."""
        tiny_model.save(tmp_path / "model")
        (tmp_path / "model" / MANIFEST_FILE).write_text("{not json")

        with pytest.raises(ArtifactFormatError):
            PrevisionModel.load(tmp_path / "model")


@pytest.mark.unit
class TestClassSelector:
    """Test the undichotomized/dichotomized selector."""

    def test_probabilities(self, tiny_training):
        """Probabilities lie in [0, 1] and labels follow the class convention."""
        selector = train_class_selector(
            tiny_training.features["undichotomized"],
            tiny_training.features["dichotomized"],
            ForestConfig(n_trees=20, seed=2),
        )
        proba = selector.predict_proba(tiny_training.features["undichotomized"][:5])

        assert selector.classes.tolist() == [DICHOTOMIZED, UNDICHOTOMIZED]
        assert np.all((proba >= 0.0) & (proba <= 1.0))

    def test_indistinguishable_classes_near_chance(self, tiny_training):
        """Two halves of one class cannot be told apart."""
        x = tiny_training.features["undichotomized"]
        order = np.random.default_rng(0).permutation(len(x))
        half = len(x) // 2
        selector = train_class_selector(
            x[order[:half]], x[order[half:]], ForestConfig(n_trees=50, seed=3)
        )
        y = np.concatenate([np.full(half, UNDICHOTOMIZED), np.full(len(x) - half, DICHOTOMIZED)])
        accuracy = selector_oob_accuracy(selector, x[order], y)

        assert 0.25 < accuracy < 0.75

    def test_restricted_mask(self):
        """Rows need closure bias and mean degree of at least one."""
        params = np.array(
            [
                [0.0, 0.2, 0.0, 0.1, 0.0],
                [0.0, 0.0, 0.3, 0.1, 0.0],
                [0.5, 0.0, 0.0, 0.1, 0.0],
                [0.0, 0.2, 0.0, 0.1, 0.0],
            ]
        )
        mask = restricted_selector_mask(params, np.array([2.0, 1.0, 3.0, 0.5]))

        assert mask.tolist() == [True, True, False, False]

    def test_width_mismatch(self, rng):
        """Both classes need the same feature width."""
        with pytest.raises(SchemaMismatchError):
            train_class_selector(rng.random((5, 4)), rng.random((5, 3)), ForestConfig(n_trees=2))

    @pytest.mark.parametrize(("label", "expected"), [(UNDICHOTOMIZED, 1.0), (DICHOTOMIZED, 0.0)])
    def test_single_class_selector(self, tiny_model, tiny_training, label, expected):
        """A selector that only saw one model class reports that class with certainty."""
        x = tiny_training.features["undichotomized"]
        empty = np.empty((0, x.shape[1]))
        pair = (x, empty) if label == UNDICHOTOMIZED else (empty, x)
        selector = train_class_selector(*pair, ForestConfig(n_trees=5, seed=1))
        model = PrevisionModel(
            tiny_model.model_spec,
            tiny_model.prior,
            tiny_model.config,
            tiny_model.mean_forests,
            tiny_model.square_forests,
            tiny_model.quantile_forests,
            selector=selector,
        )

        assert selector.classes.tolist() == [label]
        assert model.undichotomized_probability(x[:3]).tolist() == [expected] * 3


STUDY_N = 20


@pytest.fixture(scope="module")
def prior_study():
    """A model trained on 3000 prior draws and 500 fresh draws to score it on."""
    threads = os.cpu_count() or 1
    prior = PriorSpec(n=STUDY_N, target_mean_degree=4.0)
    spec = ModelSpec(n=STUDY_N)
    burnin = 100 * STUDY_N * STUDY_N
    params, features = generate_training_set(prior, 3000, spec, burnin, seed=101, threads=threads)
    cfg = PrevisionConfig(forest=ForestConfig(n_trees=300), seed=7, threads=threads)
    model = train_prevision(params, features, cfg, spec, prior)
    truths, observed = generate_training_set(prior, 500, spec, burnin, seed=202, threads=threads)
    return model, truths, observed


@pytest.mark.slow
class TestPrevisionCalibration:
    """Test posterior summaries against parameters drawn from the prior."""

    def test_intervals_cover_prior_draws(self, prior_study):
        """Central 95% intervals contain the generating value in at least 90% of 500 graphs."""
        model, truths, observed = prior_study
        summaries, _ = model.summarize(observed)

        for k, name in enumerate(PARAM_NAMES):
            bounds = np.array([s.interval(name) for s in summaries])
            covered = (bounds[:, 0] <= truths[:, k]) & (truths[:, k] <= bounds[:, 1])
            assert covered.mean() >= 0.90, name

    def test_mean_square_dominates_squared_mean(self, prior_study):
        """On held-out rows the mean-square forest exceeds the squared mean forest on average."""
        model, _, observed = prior_study

        for name in PARAM_NAMES:
            square = model.forest(name, "square").predict(observed)
            mean = model.forest(name, "mean").predict(observed)
            assert square.mean() >= (mean**2).mean(), name

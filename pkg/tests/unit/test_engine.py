"""Unit tests for bias events, the update probability and the chain sampler."""

import numpy as np
import pytest

from biasnet.engine import (
    EventCounts,
    ModelSpec,
    ParamVector,
    burnin_steps,
    decode_pair,
    derive_seed,
    event_counts,
    illposed_marginals,
    make_draw_streams,
    sfbn_sample,
    sfbn_step,
    substream,
    update_probability,
)
from biasnet.errors import AbsorbingStateError, InvalidArgumentError
from biasnet.graph import DiGraph, dyad_census

# Only d and pi: the per-dyad chain is closed and the shared-partner scan is skipped.
RECIPROCITY_ONLY = {"sibling": False, "double_role": False, "satiation": False}


def dyad_stationary(d: float, pi: float) -> np.ndarray:
    """Stationary (mutual, asymmetric, null) fractions of the 4-state dyad chain."""
    p = (d, 1.0 - (1.0 - d) * (1.0 - pi))
    states = [(0, 0), (0, 1), (1, 0), (1, 1)]
    index = {s: k for k, s in enumerate(states)}
    t = np.zeros((4, 4))
    for (a, b), k in index.items():
        # either direction of the dyad is chosen with probability 1/2
        for new_a in (0, 1):
            t[k, index[(new_a, b)]] += 0.5 * (p[b] if new_a else 1.0 - p[b])
        for new_b in (0, 1):
            t[k, index[(a, new_b)]] += 0.5 * (p[a] if new_b else 1.0 - p[a])
    values, vectors = np.linalg.eig(t.T)
    stationary = np.real(vectors[:, np.argmin(np.abs(values - 1.0))])
    stationary /= stationary.sum()
    return np.array([stationary[3], stationary[1] + stationary[2], stationary[0]])


def census_fractions(g: DiGraph) -> np.ndarray:
    total = g.n * (g.n - 1) / 2
    return np.array(dyad_census(g)) / total


@pytest.mark.unit
class TestEventCounts:
    """Test potential-event counting for a focal pair."""

    def test_counts_exclude_focal_edge(self):
        """The focal edge never counts towards satiation."""
        g = DiGraph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 0)])
        counts = event_counts(g, 0, 1, ModelSpec(n=4))

        assert counts.t_parent == 1
        assert counts.w_satiation == 2

    def test_shared_partners_and_double_roles(self):
        """Vertices pointing at both i and j are shared partners."""
        g = DiGraph.from_edges(5, [(2, 0), (2, 1), (3, 0), (3, 1), (4, 0), (1, 0)])
        counts = event_counts(g, 0, 1, ModelSpec(n=5))

        assert counts.t_sibling == 2
        assert counts.t_droles == 2

    def test_dichotomized_truncates_at_one(self):
        """Closure statistics are capped at 1 in the dichotomized model."""
        g = DiGraph.from_edges(5, [(2, 0), (2, 1), (3, 0), (3, 1), (1, 0)])
        counts = event_counts(g, 0, 1, ModelSpec(n=5, dichotomized=True))

        assert counts.t_sibling == 1
        assert counts.t_droles == 1

    def test_inactive_terms_are_zero(self):
        """Switching a term off zeroes its count."""
        g = DiGraph.from_edges(4, [(1, 0), (0, 2)])
        spec = ModelSpec(n=4, parent=False, satiation=False)
        counts = event_counts(g, 0, 1, spec)

        assert counts.t_parent == 0
        assert counts.w_satiation == 0

    def test_self_pair_rejected(self):
        """A focal self-pair is an invalid argument."""
        with pytest.raises(InvalidArgumentError):
            event_counts(DiGraph(3), 1, 1, ModelSpec(n=3))

    def test_single_sibling_configuration(self):
        """A common source 2 -> {0, 1} gives one sibling event and nothing else."""
        g = DiGraph.from_edges(3, [(2, 0), (2, 1)])
        counts = event_counts(g, 0, 1, ModelSpec(n=3))

        assert counts.t_parent == 0
        assert counts.t_sibling == 1
        assert counts.t_droles == 0
        assert counts.w_satiation == 0

    def test_relabeling_is_equivariant(self, random_digraph, rng):
        """Renaming vertices renames the focal pair and nothing else changes."""
        g = random_digraph(8, 0.35)
        perm = rng.permutation(8)
        h = g.relabel(perm)
        spec = ModelSpec(n=8)
        psi = ParamVector(d=0.1, pi=0.3, sigma=0.2, rho=0.15, delta=0.05)

        for i in range(8):
            for j in range(8):
                if i == j:
                    continue
                before = event_counts(g, i, j, spec)
                after = event_counts(h, int(perm[i]), int(perm[j]), spec)
                assert after == before
                assert update_probability(after, psi) == update_probability(before, psi)


@pytest.mark.unit
class TestUpdateProbability:
    """Test the closed-form update probability."""

    def test_sibling_example(self):
        """d=0.1, sigma=0.2 with two shared partners."""
        psi = ParamVector(d=0.1, sigma=0.2)

        assert update_probability(EventCounts(t_sibling=2), psi) == pytest.approx(0.424, abs=1e-12)

    def test_satiation_scales_formation(self):
        """Two other out-ties at delta=0.5 quarter the formation probability."""
        psi = ParamVector(d=0.1, sigma=0.2, delta=0.5)
        counts = EventCounts(t_sibling=2, w_satiation=2)

        assert update_probability(counts, psi) == pytest.approx(0.106, abs=1e-12)

    def test_no_events_gives_baseline(self):
        """Without events only the baseline fires."""
        assert update_probability(EventCounts(), ParamVector(d=0.3, pi=0.9)) == pytest.approx(0.3)

    def test_log_space_matches_direct_product(self):
        """Large counts take the log-space path and agree with the product."""
        psi = ParamVector(d=0.01, sigma=0.01, delta=0.002)
        counts = EventCounts(t_sibling=100, w_satiation=80)
        expected = (1 - 0.002) ** 80 * (1 - 0.99 * 0.99**100)

        assert update_probability(counts, psi) == pytest.approx(expected, rel=1e-12)

    def test_certain_inhibition_in_log_space(self):
        """delta=1 with many out-ties gives exactly zero."""
        psi = ParamVector(d=0.5, delta=1.0)

        assert update_probability(EventCounts(w_satiation=100), psi) == 0.0

    @pytest.mark.parametrize("t_sibling", [0, 1, 10, 65, 500])
    def test_probability_in_unit_interval(self, t_sibling):
        """Every probability lies in [0, 1]."""
        psi = ParamVector(d=0.2, pi=0.3, sigma=0.4, rho=0.1, delta=0.05)
        counts = EventCounts(t_parent=1, t_sibling=t_sibling, t_droles=t_sibling, w_satiation=3)

        assert 0.0 <= update_probability(counts, psi) <= 1.0

    @pytest.mark.parametrize("w", [0, 1, 5, 63, 64, 65, 200])
    def test_each_satiation_event_multiplies_by_complement(self, w):
        """One more out-tie multiplies the probability by 1 - delta, also across the log-space switch."""
        psi = ParamVector(d=0.07, pi=0.3, sigma=0.2, rho=0.1, delta=0.013)
        base = {"t_parent": 1, "t_sibling": 3, "t_droles": 3}
        p_w = update_probability(EventCounts(**base, w_satiation=w), psi)
        p_next = update_probability(EventCounts(**base, w_satiation=w + 1), psi)

        assert p_next == pytest.approx(p_w * (1 - psi.delta), rel=1e-12)

    def test_satiation_ratio_on_random_cases(self, rng):
        """The satiation factor holds for arbitrary parameters and counts."""
        for _ in range(200):
            values = rng.uniform(0.0, 0.95, size=5)
            values[3] = max(values[3], 0.01)
            psi = ParamVector.from_array(values)
            tp = int(rng.integers(0, 2))
            ts = int(rng.integers(0, 80))
            w = int(rng.integers(0, 80))
            base = {"t_parent": tp, "t_sibling": ts, "t_droles": tp * ts}
            p_w = update_probability(EventCounts(**base, w_satiation=w), psi)
            p_next = update_probability(EventCounts(**base, w_satiation=w + 1), psi)

            assert p_next == pytest.approx(p_w * (1 - psi.delta), rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("field", ["t_parent", "t_sibling", "t_droles"])
    def test_monotone_in_formation_counts(self, field):
        """Adding a formation event never lowers the probability, and raises it when its bias is positive."""
        psi = ParamVector(d=0.05, pi=0.3, sigma=0.2, rho=0.1, delta=0.1)
        previous = update_probability(EventCounts(w_satiation=2), psi)
        for count in range(1, 90):
            current = update_probability(EventCounts(w_satiation=2, **{field: count}), psi)
            assert current > previous
            previous = current

    def test_zero_bias_leaves_probability_flat(self):
        """An event with zero bias does not move the probability."""
        psi = ParamVector(d=0.05, pi=0.3, sigma=0.0, rho=0.1)

        assert update_probability(EventCounts(t_sibling=7), psi) == pytest.approx(
            update_probability(EventCounts(), psi)
        )


@pytest.mark.unit
class TestStreams:
    """Test counter-based seeding."""

    def test_substreams_are_reproducible(self):
        """Same (seed, index) gives the same stream; other indices differ."""
        a = substream(7, 3).random(5)

        assert np.array_equal(a, substream(7, 3).random(5))
        assert not np.array_equal(a, substream(7, 4).random(5))

    def test_draw_streams_are_independent(self):
        """Prior and both chain streams of a draw are distinct."""
        streams = make_draw_streams(1, 0)
        values = [
            streams.prior.random(),
            streams.chain(False).random(),
            streams.chain(True).random(),
        ]

        assert len(set(values)) == 3

    def test_derive_seed_is_stable(self):
        """Derived seeds are deterministic non-negative 63-bit integers."""
        seed = derive_seed(42, 2, 1)

        assert seed == derive_seed(42, 2, 1)
        assert seed != derive_seed(42, 2, 0)
        assert 0 <= seed < 2**63


@pytest.mark.unit
class TestSampler:
    """Test the set-not-toggle chain."""

    def test_decode_pair_covers_all_ordered_pairs(self):
        """Codes 0..n(n-1)-1 enumerate every ordered pair once."""
        n = 6
        pairs = {decode_pair(code, n) for code in range(n * (n - 1))}

        assert len(pairs) == n * (n - 1)
        assert all(i != j for i, j in pairs)

    def test_zero_burnin_returns_initial(self):
        """With zero steps the initial graph comes back unchanged."""
        initial = DiGraph.from_edges(4, [(0, 1)])
        g = sfbn_sample(ParamVector(d=0.5), ModelSpec(n=4), 0, np.random.default_rng(0), initial)

        assert g == initial
        assert g is not initial

    def test_absorbing_state_rejected(self):
        """d = 0 from the empty graph is refused."""
        with pytest.raises(AbsorbingStateError):
            sfbn_sample(ParamVector(pi=0.5), ModelSpec(n=5), 100, np.random.default_rng(0))

    def test_negative_burnin_rejected(self):
        """Negative step counts are invalid."""
        with pytest.raises(InvalidArgumentError):
            sfbn_sample(ParamVector(d=0.1), ModelSpec(n=5), -1, np.random.default_rng(0))

    def test_order_mismatch_rejected(self):
        """The initial graph must have the model's order."""
        with pytest.raises(InvalidArgumentError):
            sfbn_sample(
                ParamVector(d=0.1), ModelSpec(n=5), 10, np.random.default_rng(0), DiGraph(4)
            )

    def test_same_seed_same_graph(self):
        """A chain is a deterministic function of its generator."""
        psi = ParamVector(pi=0.3, sigma=0.1, rho=0.1, d=0.05, delta=0.05)
        spec = ModelSpec(n=15)
        a = sfbn_sample(psi, spec, burnin_steps(15, 20), substream(3, 0))
        b = sfbn_sample(psi, spec, burnin_steps(15, 20), substream(3, 0))

        assert a == b
        assert a.degrees_consistent()

    def test_certain_satiation_caps_outdegree(self):
        """With delta = 1 no vertex ever holds more than one out-tie."""
        psi = ParamVector(d=0.5, delta=1.0)
        g = sfbn_sample(psi, ModelSpec(n=10), burnin_steps(10, 50), np.random.default_rng(1))

        assert g.outdeg.max() <= 1
        assert g.n_edges > 0

    def test_full_baseline_fills_graph(self):
        """d = 1 sets every visited pair; a long run yields the complete graph."""
        g = sfbn_sample(
            ParamVector(d=1.0), ModelSpec(n=6, **RECIPROCITY_ONLY), 5000, np.random.default_rng(2)
        )

        assert g == DiGraph.complete(6)

    def test_single_step_changes_at_most_one_edge(self, rng):
        """One step touches one ordered pair."""
        g = DiGraph.from_edges(5, [(0, 1), (2, 3)])
        before = g.edge_set()
        sfbn_step(g, ParamVector(d=0.5, pi=0.5), ModelSpec(n=5), rng)

        assert len(before ^ g.edge_set()) <= 1

    def test_baseline_only_density(self):
        """Edges are Bernoulli(d) under the baseline-only model."""
        n, d, draws = 20, 0.2, 60
        spec = ModelSpec(n=n, parent=False, **RECIPROCITY_ONLY)
        densities = np.array(
            [
                sfbn_sample(ParamVector(d=d), spec, burnin_steps(n, 30), substream(9, k)).density()
                for k in range(draws)
            ]
        )
        se = np.sqrt(d * (1 - d) / (n * (n - 1) * draws))

        assert abs(densities.mean() - d) < 4 * se

    def test_dyad_census_matches_exact_chain_small(self):
        """Dyad census under (d, pi) agrees with the exact 4-state chain."""
        n, draws = 10, 150
        psi = ParamVector(d=0.1, pi=0.5)
        spec = ModelSpec(n=n, **RECIPROCITY_ONLY)
        observed = np.array(
            [
                census_fractions(sfbn_sample(psi, spec, burnin_steps(n, 100), substream(5, k)))
                for k in range(draws)
            ]
        )
        expected = dyad_stationary(0.1, 0.5)
        se = observed.std(axis=0, ddof=1) / np.sqrt(draws)

        assert np.all(np.abs(observed.mean(axis=0) - expected) < 4 * se + 1e-9)

    @pytest.mark.slow
    def test_dyad_census_matches_exact_chain(self):
        """2000 draws at N=10 within three standard errors per census cell."""
        n, draws = 10, 2000
        psi = ParamVector(d=0.1, pi=0.5)
        spec = ModelSpec(n=n, **RECIPROCITY_ONLY)
        observed = np.array(
            [
                census_fractions(sfbn_sample(psi, spec, burnin_steps(n), substream(6, k)))
                for k in range(draws)
            ]
        )
        expected = dyad_stationary(0.1, 0.5)
        se = observed.std(axis=0, ddof=1) / np.sqrt(draws)

        assert np.all(np.abs(observed.mean(axis=0) - expected) < 3 * se)

    @pytest.mark.slow
    def test_baseline_only_density_at_scale(self):
        """N=50, d=0.04 over 200 draws at the default burn-in."""
        n, d, draws = 50, 0.04, 200
        spec = ModelSpec(n=n, parent=False, **RECIPROCITY_ONLY)
        densities = np.array(
            [
                sfbn_sample(ParamVector(d=d), spec, burnin_steps(n), substream(8, k)).density()
                for k in range(draws)
            ]
        )
        se = densities.std(ddof=1) / np.sqrt(draws)

        assert abs(densities.mean() - d) < 3 * se


@pytest.mark.unit
class TestIllPosedness:
    """Test the contradictory-marginals demonstration."""

    def test_documented_values(self):
        """d = sigma = 0.5 gives 0.6 and 0.75."""
        m1, m2 = illposed_marginals(0.5, 0.5)

        assert m1 == pytest.approx(0.6, abs=1e-12)
        assert m2 == pytest.approx(0.75, abs=1e-12)

    @pytest.mark.parametrize("d", np.linspace(0.01, 0.99, 100))
    def test_agree_without_sibling_bias(self, d):
        """With sigma = 0 both routes give d."""
        m1, m2 = illposed_marginals(float(d), 0.0)

        assert m1 == pytest.approx(m2, abs=1e-12)

    @pytest.mark.parametrize(("d", "sigma"), [(0.0, 0.5), (1.0, 0.5), (0.5, 1.0), (0.5, -0.1)])
    def test_domain_checked(self, d, sigma):
        """Values outside the open/half-open domain are invalid."""
        with pytest.raises(InvalidArgumentError):
            illposed_marginals(d, sigma)

    def test_sibling_bias_separates_marginals(self):
        """d = 0.25, sigma = 0.1 gives two different values."""
        m1, m2 = illposed_marginals(0.25, 0.1)

        assert m1 == pytest.approx(0.08125 / 0.30625, rel=1e-12)
        assert m2 == pytest.approx(0.325, rel=1e-12)
        assert m1 != pytest.approx(m2, abs=1e-6)

    @pytest.mark.parametrize("sigma", [0.05, 0.3, 0.6, 0.9])
    @pytest.mark.parametrize("d", [0.1, 0.5, 0.9])
    def test_marginals_differ_for_positive_sigma(self, d, sigma):
        """Any sibling bias makes the two routes disagree."""
        m1, m2 = illposed_marginals(d, sigma)

        assert abs(m1 - m2) > 1e-9

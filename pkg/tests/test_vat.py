import numpy as np
import pytest

from losses.vat import (
    APPLY_ASC,
    APPLY_ATE,
    APPLY_BOTH,
    VatConfig,
    VatCounters,
    adversarial_perturbation,
    branch_logits,
    vat_loss,
)
from numcore.tensor import backward, constant, no_grad
from utils.errors import ShapeError


TOKENS = np.array([
    [2, 5, 6, 7, 8, 3],
    [2, 9, 10, 11, 3, 0],
])
ATTENTION = np.array([
    [1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 0],
])
LOSS_MASK = np.array([
    [0, 1, 1, 1, 1, 0],
    [0, 1, 1, 1, 0, 0],
])
TERMS = np.array([
    [2, 0, 1, 2, 2, 2],
    [2, 2, 0, 2, 2, 2],
])


def perturb(model, cfg=None, seed=11, counters=None):
    cfg = cfg or VatConfig()
    return adversarial_perturbation(
        model.embed(TOKENS), model, cfg, seed,
        attention_mask=ATTENTION, loss_mask=LOSS_MASK, q_labels=TERMS, counters=counters,
    )


def loss(model, r, cfg=None):
    return vat_loss(
        model.embed(TOKENS), r, model, cfg or VatConfig(),
        attention_mask=ATTENTION, loss_mask=LOSS_MASK, q_labels=TERMS,
    )


def mean_kl(p_logits, q_logits):
    p = np.exp(p_logits - np.log(np.exp(p_logits).sum(axis=-1, keepdims=True)))
    log_p = np.log(p)
    log_q = q_logits - np.log(np.exp(q_logits).sum(axis=-1, keepdims=True))
    return float(np.mean(np.sum(p * (log_p - log_q), axis=-1)))


class TestVatConfig:
    def test_defaults_are_valid(self):
        cfg = VatConfig()
        assert (cfg.xi, cfg.eps, cfg.apply_to) == (1e-6, 2.0, APPLY_BOTH)
        assert cfg.validate() == []

    def test_rejects_bad_values(self):
        assert VatConfig(xi=0.0).validate()
        assert VatConfig(eps=-1.0).validate()
        assert VatConfig(apply_to="decoder").validate()


class TestAdversarialPerturbation:
    @pytest.mark.parametrize("apply_to", [APPLY_ATE, APPLY_ASC, APPLY_BOTH])
    def test_norm_equals_radius(self, tiny_model, apply_to):
        for seed in (1, 2, 3):
            r = perturb(tiny_model, VatConfig(apply_to=apply_to), seed=seed)
            assert r.shape == (2, 6, tiny_model.config.hidden)
            np.testing.assert_allclose(np.linalg.norm(r, axis=(1, 2)), [2.0, 2.0], rtol=1e-6)

    def test_every_sentence_of_a_large_batch_gets_the_full_radius(self, tiny_model, rng):
        n, width = 8, 10
        lengths = rng.integers(3, width + 1, size=n)
        attention = (np.arange(width)[None, :] < lengths[:, None]).astype(np.int64)
        loss_mask = attention.copy()
        loss_mask[:, 0] = 0
        loss_mask[np.arange(n), lengths - 1] = 0
        tokens = np.where(attention > 0, rng.integers(4, 20, size=(n, width)), 0)
        terms = np.full((n, width), 2)
        r = adversarial_perturbation(
            tiny_model.embed(tokens), tiny_model, VatConfig(apply_to=APPLY_ATE), 3,
            attention_mask=attention, loss_mask=loss_mask, q_labels=terms,
        )
        np.testing.assert_allclose(np.linalg.norm(r, axis=(1, 2)), np.full(n, 2.0), rtol=1e-6)
        assert not np.any(r[attention == 0])

    def test_padded_positions_stay_unperturbed(self, tiny_model):
        r = perturb(tiny_model)
        assert not np.any(r[1, 5])

    def test_doubling_radius_doubles_perturbation(self, tiny_model):
        r2 = perturb(tiny_model, VatConfig(eps=2.0))
        r4 = perturb(tiny_model, VatConfig(eps=4.0))
        np.testing.assert_allclose(r4, 2.0 * r2, rtol=1e-12)

    def test_same_seed_same_perturbation(self, tiny_model):
        np.testing.assert_array_equal(perturb(tiny_model, seed=5), perturb(tiny_model, seed=5))
        assert not np.array_equal(perturb(tiny_model, seed=5), perturb(tiny_model, seed=6))

    def test_parameters_receive_no_gradient(self, tiny_model):
        perturb(tiny_model)
        for name, tensor in tiny_model.params.items():
            assert not np.any(tensor.grad), name

    def test_flat_output_gives_zero_perturbation(self, tiny_model):
        for head in ("ate_head.w", "asc_head.w"):
            tiny_model.params.assign(head, np.zeros(tiny_model.params[head].shape))
        counters = VatCounters()
        r = perturb(tiny_model, counters=counters)
        np.testing.assert_array_equal(r, 0.0)
        assert counters.perturbations == 2 and counters.zero_gradients == 2

    def test_counts_every_sentence(self, tiny_model):
        counters = VatCounters()
        perturb(tiny_model, counters=counters)
        perturb(tiny_model, counters=counters)
        assert counters.perturbations == 4 and counters.zero_gradients == 0

    def test_asc_branch_needs_queries(self, tiny_model):
        with pytest.raises(ValueError):
            adversarial_perturbation(
                tiny_model.embed(TOKENS), tiny_model, VatConfig(apply_to=APPLY_ASC), 0,
                attention_mask=ATTENTION, loss_mask=LOSS_MASK,
            )


class TestVatLoss:
    def test_zero_perturbation_gives_zero_loss(self, tiny_model):
        r = np.zeros((2, 6, tiny_model.config.hidden), dtype=np.float32)
        assert loss(tiny_model, r).item() == 0.0

    def test_non_negative(self, model64, rng):
        for _ in range(50):
            r = rng.standard_normal((2, 6, model64.config.hidden)) * rng.uniform(0.01, 3.0)
            assert loss(model64, r).item() >= -1e-15

    def test_adversarial_direction_beats_zero(self, model64):
        assert loss(model64, perturb(model64)).item() > 0.0

    @pytest.mark.parametrize("apply_to", [APPLY_ATE, APPLY_BOTH])
    def test_matches_enumerated_kl(self, model64, rng, apply_to):
        cfg = VatConfig(apply_to=apply_to)
        r = rng.standard_normal((2, 6, model64.config.hidden)) * 0.5
        embeddings = model64.embed(TOKENS)
        with no_grad():
            clean = branch_logits(model64, embeddings, ATTENTION, TERMS, apply_to)
            shifted = branch_logits(model64, embeddings, ATTENTION, TERMS, apply_to, constant(r))
        rows = LOSS_MASK.reshape(-1) > 0
        per_branch = [
            mean_kl(c.values.reshape(-1, c.shape[-1])[rows], s.values.reshape(-1, s.shape[-1])[rows])
            for c, s in zip(clean, shifted)
        ]
        value = vat_loss(embeddings, r, model64, cfg, ATTENTION, LOSS_MASK, TERMS).item()
        assert value == pytest.approx(np.mean(per_branch), abs=1e-10)

    def test_gradient_reaches_parameters_only_through_perturbed_side(self, model64, rng):
        r = rng.standard_normal((2, 6, model64.config.hidden))
        backward(loss(model64, r))
        assert np.any(model64.params["ate_head.w"].grad)
        assert np.any(model64.params["encoder.0.attn.wq"].grad)

    def test_shape_mismatch(self, tiny_model):
        with pytest.raises(ShapeError):
            loss(tiny_model, np.zeros((2, 5, tiny_model.config.hidden)))

"""Shared fixtures: a tiny network, a small synthetic corpus and a fast training config."""

from dataclasses import replace

import numpy as np
import pytest

from data.corpus import TaggedSentence
from data.encoding import encode_corpus
from data.synth import synth_generate
from data.vocab import Vocab
from losses.vat import VatConfig
from model.config import EncoderConfig
from model.grace import GraceModel
from model.params import init_params
from utils.config import TrainConfig


def sentence(*triples) -> TaggedSentence:
    """TaggedSentence from (token, term, polarity) triples."""
    tokens, terms, polarities = (list(x) for x in zip(*triples))
    return TaggedSentence(tokens, terms, polarities)


@pytest.fixture
def tiny_config() -> EncoderConfig:
    return EncoderConfig(
        layers=2,
        shared_layers=1,
        hidden=8,
        heads=2,
        ffn=16,
        vocab_size=20,
        max_len=16,
        asc_layers=1,
        dropout=0.0,
    )


@pytest.fixture
def tiny_model(tiny_config) -> GraceModel:
    return GraceModel.initialize(tiny_config, seed=3)


@pytest.fixture
def model64(tiny_config) -> GraceModel:
    """Tiny model with trainable 64-bit parameters, for finite-difference checks."""
    return GraceModel(tiny_config, init_params(tiny_config, seed=3).copy(dtype=np.float64))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_corpus():
    return synth_generate(24, seed=5, imbalance=2.0)


@pytest.fixture
def small_vocab(small_corpus) -> Vocab:
    return Vocab.build(small_corpus)


@pytest.fixture
def small_examples(small_corpus, small_vocab):
    examples, skipped = encode_corpus(small_corpus, small_vocab, max_len=64)
    assert skipped == 0
    return examples


@pytest.fixture
def fast_config() -> TrainConfig:
    """A complete schedule that runs in well under a second per phase."""
    return TrainConfig(
        seed=7,
        stage1_epochs=1,
        stage1_vat_epochs=1,
        stage2_epochs=1,
        lr_stage1=1e-3,
        lr_stage1_vat=5e-4,
        lr_stage2_asc=1e-3,
        lr_stage2_ate=1e-4,
        batch=8,
        eval_batch=16,
        model=EncoderConfig(
            layers=2, shared_layers=1, hidden=8, heads=2, ffn=16, max_len=64, asc_layers=1, dropout=0.1
        ),
        vat=VatConfig(),
    )


@pytest.fixture
def no_extras_config(fast_config) -> TrainConfig:
    return replace(fast_config, use_ghm=False, use_vat=False)


@pytest.fixture
def make_sentence():
    return sentence

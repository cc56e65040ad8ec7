"""
Named training configurations.

`published` keeps the published schedule and learning rates, which assume a
pretrained backbone. `desk` keeps every mechanism but raises learning
rates and epoch counts for a randomly initialized network on a small
synthetic corpus. The ablations start from `desk`.
"""

from dataclasses import replace
from typing import Callable, Dict

from losses.vat import VatConfig
from model.config import EncoderConfig
from utils.config import TrainConfig
from utils.errors import ConfigError


def published() -> TrainConfig:
    return TrainConfig()


def desk() -> TrainConfig:
    return TrainConfig(
        stage1_epochs=6,
        stage1_vat_epochs=1,
        stage2_epochs=8,
        lr_stage1=1e-3,
        lr_stage1_vat=5e-4,
        lr_stage2_asc=1e-3,
        lr_stage2_ate=1e-4,
        batch=16,
        model=EncoderConfig(max_len=160),
        vat=VatConfig(),
    )


def base() -> TrainConfig:
    """Plain joint tagger: no decoder, every layer shared, no GHM, no VAT."""
    cfg = desk()
    return replace(
        cfg,
        use_ghm=False,
        use_vat=False,
        model=replace(cfg.model, shared_layers=cfg.model.layers, asc_layers=0),
    )


def no_ghm() -> TrainConfig:
    return replace(desk(), use_ghm=False)


def no_vat() -> TrainConfig:
    return replace(desk(), use_vat=False)


PRESETS: Dict[str, Callable[[], TrainConfig]] = {
    "published": published,
    "desk": desk,
    "base": base,
    "no_ghm": no_ghm,
    "no_vat": no_vat,
}


def get_preset(name: str) -> TrainConfig:
    """A fresh TrainConfig for a preset name."""
    try:
        return PRESETS[name]()
    except KeyError:
        options = ", ".join(PRESETS)
        raise ConfigError(f"unknown preset '{name}' (choose from {options})", key="preset") from None

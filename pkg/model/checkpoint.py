"""
Checkpoint files: a plain-text header followed by raw tensor blobs.

Header layout (UTF-8, one entry per line, terminated by `end`):

    grace-tagger-checkpoint 1
    config.<field>=<value>          one line per EncoderConfig field
    meta.<key>=<value>              free-form provenance (stage, epoch, seed)
    vocab-size <n>                  present whenever a vocabulary is stored
    vocab <token>                   non-special vocabulary, in id order
    tensor <name> <d1,d2,...> <offset> <nbytes>
    end

Blobs are little-endian float32 in header order; offsets count from the
first byte after the header.
"""

from collections import OrderedDict
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from data.vocab import Vocab
from model.config import EncoderConfig
from model.params import ModelParams
from numcore.tensor import DiffTensor
from utils.errors import CheckpointError
from utils.logging import get_logger


logger = get_logger(__name__)

MAGIC = "grace-tagger-checkpoint 1"
BLOB_DTYPE = np.dtype("<f4")


@dataclass
class Checkpoint:
    """Everything needed to rebuild a trained model."""
    config: EncoderConfig
    params: ModelParams
    vocab: Optional[Vocab] = None
    meta: Dict[str, str] = field(default_factory=dict)


def _format_value(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def save_checkpoint(
    path: Path,
    config: EncoderConfig,
    params: ModelParams,
    vocab: Optional[Vocab] = None,
    meta: Optional[Dict[str, object]] = None,
) -> Path:
    """Write a checkpoint; the bytes depend only on the arguments."""
    path = Path(path)
    params.check_shapes(config)

    lines = [MAGIC]
    for f in fields(config):
        lines.append(f"config.{f.name}={_format_value(getattr(config, f.name))}")
    for key in sorted(meta or {}):
        value = str(meta[key])
        if "\n" in value or "=" in key:
            raise CheckpointError(f"meta entry '{key}' cannot be stored in the header")
        lines.append(f"meta.{key}={value}")
    if vocab is not None:
        lines.append(f"vocab-size {len(vocab.tokens)}")
        lines.extend(f"vocab {token}" for token in vocab.tokens)

    blobs: List[bytes] = []
    offset = 0
    for name, tensor in params.items():
        blob = np.ascontiguousarray(tensor.values, dtype=BLOB_DTYPE).tobytes()
        shape = ",".join(str(d) for d in tensor.shape)
        lines.append(f"tensor {name} {shape} {offset} {len(blob)}")
        blobs.append(blob)
        offset += len(blob)
    lines.append("end")

    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "wb") as f:
            f.write(("\n".join(lines) + "\n").encode("utf-8"))
            for blob in blobs:
                f.write(blob)
    except OSError as e:
        raise CheckpointError(f"cannot write checkpoint {path}: {e}") from e

    logger.info(f"Saved checkpoint {path} ({len(params)} tensors, {offset} bytes)")
    return path


def _coerce(config_field, raw: str):
    if config_field.type in (int, "int"):
        return int(raw)
    if config_field.type in (float, "float"):
        return float(raw)
    return raw


def load_checkpoint(path: Path) -> Checkpoint:
    """Read a checkpoint written by save_checkpoint."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e

    marker = b"\nend\n"
    end = data.find(marker)
    if not data.startswith(MAGIC.encode("utf-8")) or end < 0:
        raise CheckpointError(f"{path} is not a grace-tagger checkpoint")
    header = data[:end].decode("utf-8").split("\n")
    body = memoryview(data)[end + len(marker):]

    config_fields = {f.name: f for f in fields(EncoderConfig)}
    values: Dict[str, object] = {}
    meta: Dict[str, str] = {}
    tokens: List[str] = []
    vocab_size: Optional[int] = None
    tensors: "OrderedDict[str, DiffTensor]" = OrderedDict()

    for line in header[1:]:
        if line.startswith("config."):
            key, _, raw = line[len("config."):].partition("=")
            if key not in config_fields:
                raise CheckpointError(f"unknown config field '{key}' in {path}")
            values[key] = _coerce(config_fields[key], raw)
        elif line.startswith("meta."):
            key, _, raw = line[len("meta."):].partition("=")
            meta[key] = raw
        elif line.startswith("vocab-size "):
            try:
                vocab_size = int(line[len("vocab-size "):])
            except ValueError:
                raise CheckpointError(f"malformed vocabulary size in {path}: {line!r}") from None
        elif line.startswith("vocab "):
            tokens.append(line[len("vocab "):])
        elif line.startswith("tensor "):
            try:
                _, name, shape_text, offset_text, nbytes_text = line.split(" ")
                shape = tuple(int(d) for d in shape_text.split(",") if d)
                offset, nbytes = int(offset_text), int(nbytes_text)
            except ValueError:
                raise CheckpointError(f"malformed tensor entry in {path}: {line!r}") from None
            if offset + nbytes > len(body):
                raise CheckpointError(f"tensor '{name}' runs past the end of {path}")
            array = np.frombuffer(body[offset:offset + nbytes], dtype=BLOB_DTYPE)
            if array.size != int(np.prod(shape, dtype=np.int64)):
                raise CheckpointError(f"tensor '{name}' has {array.size} values for shape {shape}")
            tensors[name] = DiffTensor(
                array.reshape(shape).astype(np.float32), requires_grad=True
            )
        elif line:
            raise CheckpointError(f"unexpected header line in {path}: {line!r}")

    missing = [name for name in config_fields if name not in values]
    if missing:
        raise CheckpointError(f"checkpoint {path} lacks config fields: {', '.join(missing)}")

    config = EncoderConfig(**values)
    params = ModelParams(tensors)
    try:
        params.check_shapes(config)
    except Exception as e:
        raise CheckpointError(f"checkpoint {path} does not match its config: {e}") from e

    if vocab_size is not None and vocab_size != len(tokens):
        raise CheckpointError(f"checkpoint {path} declares {vocab_size} vocabulary entries but holds {len(tokens)}")
    vocab = Vocab(tokens=tokens) if tokens or vocab_size is not None else None
    logger.info(f"Loaded checkpoint {path} ({len(tensors)} tensors)")
    return Checkpoint(config, params, vocab, meta)

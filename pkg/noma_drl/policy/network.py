"""
Policy Network Module

Maps an (N, K, F) state tensor to N*K action logits. Three model kinds share
one contract: fully connected, convolutional over the user x channel grid,
and self-attention over (user, channel) tokens. Parameters are float64.

Checkpoint format:
    arch,<kind>,<N>,<K>,<F>,<h1;h2;...>\n
    followed by the little-endian float64 parameter blob in parameters() order.
"""

import copy
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import torch
from torch import nn

from ..config.run_config import Architecture
from ..environment.episode import CNR_FEATURE_SCALE
from ..utils.logger import get_logger

logger = get_logger("noma_drl.policy.network")

HEADER_TAG = "arch"


class FullyConnectedPolicy(nn.Module):
    """flatten -> [Linear + ReLU] x len(hidden) -> Linear(N*K)"""

    def __init__(self, arch: Architecture):
        super().__init__()
        n, k, f = arch.input_dims
        layers = []
        width = n * k * f
        for hidden in arch.hidden_sizes:
            layers += [nn.Linear(width, hidden), nn.ReLU()]
            width = hidden
        layers.append(nn.Linear(width, n * k))
        self.network = nn.Sequential(*layers)

    def forward(self, states: torch.Tensor) -> torch.Tensor:
        return self.network(states.flatten(start_dim=1))


class ConvolutionalPolicy(nn.Module):
    """Features as input planes over the N x K grid; a 1x1 conv gives one logit per cell."""

    def __init__(self, arch: Architecture):
        super().__init__()
        f = arch.input_dims[2]
        layers = []
        planes = f
        for hidden in arch.hidden_sizes:
            layers += [nn.Conv2d(planes, hidden, kernel_size=3, padding=1), nn.ReLU()]
            planes = hidden
        layers.append(nn.Conv2d(planes, 1, kernel_size=1))
        self.network = nn.Sequential(*layers)

    def forward(self, states: torch.Tensor) -> torch.Tensor:
        # (B, N, K, F) -> (B, F, N, K)
        planes = states.permute(0, 3, 1, 2)
        return self.network(planes).flatten(start_dim=1)


class AttentionPolicy(nn.Module):
    """Single-head self-attention over the N*K (user, channel) tokens."""

    def __init__(self, arch: Architecture):
        super().__init__()
        f = arch.input_dims[2]
        width = arch.hidden_sizes[0]
        self.embed = nn.Linear(f, width)
        self.attention = nn.MultiheadAttention(width, num_heads=1, batch_first=True)
        self.head = nn.Linear(width, 1)

    def forward(self, states: torch.Tensor) -> torch.Tensor:
        tokens = self.embed(states.flatten(start_dim=1, end_dim=2))
        attended, _ = self.attention(tokens, tokens, tokens, need_weights=False)
        return self.head(torch.relu(tokens + attended)).squeeze(-1)


MODEL_KINDS = {
    "fully_connected": FullyConnectedPolicy,
    "convolutional": ConvolutionalPolicy,
    "attention": AttentionPolicy,
}


@dataclass(eq=False)
class PolicyParameters:
    """
    A policy network together with the architecture it was built from.

    Attributes:
        arch: Architecture of the network
        module: float64 torch module mapping (B, N, K, F) states to (B, N*K) logits
    """
    arch: Architecture
    module: nn.Module

    @property
    def param_count(self) -> int:
        return sum(p.numel() for p in self.module.parameters())

    def vector(self) -> np.ndarray:
        """All parameters flattened in parameters() order."""
        return nn.utils.parameters_to_vector(self.module.parameters()).detach().numpy().copy()

    def set_vector(self, values: np.ndarray) -> None:
        with torch.no_grad():
            nn.utils.vector_to_parameters(torch.tensor(values, dtype=torch.float64), self.module.parameters())

    def copy(self) -> "PolicyParameters":
        return PolicyParameters(self.arch, copy.deepcopy(self.module))

    def logits(self, states: torch.Tensor) -> torch.Tensor:
        """(B, N, K, F) float64 states -> (B, N*K) logits."""
        return self.module(center_cnr(states))


def center_cnr(states: torch.Tensor) -> torch.Tensor:
    """
    Re-express the CNR plane in decades relative to its instance mean.

    Scaling every CNR by a common factor, e.g. a different noise level, leaves
    the logits unchanged.
    """
    cnr = states[..., :1] / CNR_FEATURE_SCALE
    cnr = cnr - cnr.mean(dim=(1, 2), keepdim=True)
    return torch.cat([cnr, states[..., 1:]], dim=-1)


def build_module(arch: Architecture) -> nn.Module:
    return MODEL_KINDS[arch.kind](arch).double()


def init_params(arch: Architecture, seed: int) -> PolicyParameters:
    """
    Build a policy with Xavier-uniform weights and zero biases.

    Every tensor with two or more dimensions is a weight; convolution fans
    include the receptive field.

    Args:
        arch: Architecture
        seed: Initialization seed

    Returns:
        PolicyParameters, identical for identical (arch, seed)
    """
    module = build_module(arch)
    generator = torch.Generator().manual_seed(int(seed))
    with torch.no_grad():
        for param in module.parameters():
            if param.dim() >= 2:
                nn.init.xavier_uniform_(param, generator=generator)
            else:
                nn.init.zeros_(param)
    params = PolicyParameters(arch, module)
    logger.debug(f"Initialized {arch.kind} policy {arch.hidden_sizes} with {params.param_count} parameters (seed={seed})")
    return params


def copy_params(params: PolicyParameters) -> PolicyParameters:
    """Independent deep copy of a policy."""
    return params.copy()


def _header(arch: Architecture) -> str:
    n, k, f = arch.input_dims
    hidden = ";".join(str(h) for h in arch.hidden_sizes)
    return f"{HEADER_TAG},{arch.kind},{n},{k},{f},{hidden}\n"


def save_params(params: PolicyParameters, path: Union[str, Path]) -> None:
    """Write a checkpoint: header line, then the little-endian float64 blob."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = params.vector().astype("<f8").tobytes()
    with open(path, "wb") as f:
        f.write(_header(params.arch).encode("ascii"))
        f.write(blob)
    logger.info(f"Saved {params.param_count} parameters to {path}")


def load_params(path: Union[str, Path]) -> PolicyParameters:
    """
    Read a checkpoint written by save_params.

    Raises:
        ValueError: Malformed header, size mismatch or non-finite values
    """
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise ValueError(f"{path}: missing checkpoint header")
    fields = raw[:newline].decode("ascii").split(",")
    if len(fields) != 6 or fields[0] != HEADER_TAG:
        raise ValueError(f"{path}: malformed checkpoint header {raw[:newline]!r}")

    _, kind, n, k, f, hidden = fields
    arch = Architecture(kind, tuple(int(h) for h in hidden.split(";")), (int(n), int(k), int(f)))
    values = np.frombuffer(raw[newline + 1:], dtype="<f8")

    params = PolicyParameters(arch, build_module(arch))
    if values.size != params.param_count:
        raise ValueError(f"{path}: expected {params.param_count} parameters, found {values.size}")
    if not np.isfinite(values).all():
        raise ValueError(f"{path}: checkpoint holds non-finite parameters")
    params.set_vector(values.astype(np.float64))
    logger.info(f"Loaded {arch.kind} policy with {params.param_count} parameters from {path}")
    return params

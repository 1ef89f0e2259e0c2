"""Per-pixel MLP classifier with a hand-written reverse pass."""

from dataclasses import dataclass

import numpy as np

from transport.exceptions import DimensionMismatchError

from .exceptions import CacheMismatchError


@dataclass
class Model:
    """Fully connected network: rectifier on hidden layers, leaf logits out.

    ``weights[i]`` has shape (fan_in, fan_out); ``biases[i]`` has shape (fan_out,).
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @classmethod
    def initialize(cls, layer_sizes: tuple[int, ...], rng: np.random.Generator) -> "Model":
        """He-normal weights, zero biases."""
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights=weights, biases=biases)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0], *(w.shape[1] for w in self.weights))

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    def parameters(self) -> list[np.ndarray]:
        """Weights and biases interleaved per layer: W0, b0, W1, b1, ..."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params

    @classmethod
    def from_parameters(cls, params: list[np.ndarray]) -> "Model":
        return cls(weights=list(params[0::2]), biases=list(params[1::2]))

    def flat(self) -> np.ndarray:
        return np.concatenate([p.reshape(-1) for p in self.parameters()])

    @classmethod
    def from_flat(cls, layer_sizes: tuple[int, ...], flat: np.ndarray) -> "Model":
        params, offset = [], 0
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            params.append(flat[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out).copy())
            offset += fan_in * fan_out
            params.append(flat[offset:offset + fan_out].copy())
            offset += fan_out
        if offset != flat.size:
            raise DimensionMismatchError(
                f"Parameter blob has {flat.size} values, layers need {offset}",
                expected=offset,
                actual=flat.size,
            )
        return cls.from_parameters(params)

    def copy(self) -> "Model":
        return Model.from_parameters([p.copy() for p in self.parameters()])


@dataclass(frozen=True)
class ForwardCache:
    """Layer inputs and pre-activations remembered for the reverse pass."""

    inputs: tuple[np.ndarray, ...]
    pre_activations: tuple[np.ndarray, ...]
    layer_sizes: tuple[int, ...]


@dataclass(frozen=True)
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def parameters(self) -> list[np.ndarray]:
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters())


def forward(model: Model, pixels) -> tuple[np.ndarray, ForwardCache]:
    """Logits for (N, bands) normalized pixels; a single (bands,) pixel gives (C,) logits."""
    x = np.asarray(pixels, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != model.n_inputs:
        raise DimensionMismatchError(
            f"Pixels have {x.shape[1]} bands, model expects {model.n_inputs}",
            expected=model.n_inputs,
            actual=x.shape[1],
        )

    inputs, pre_activations = [], []
    activation = x
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        inputs.append(activation)
        z = activation @ w + b
        pre_activations.append(z)
        activation = z if i == last else np.maximum(z, 0.0)

    cache = ForwardCache(tuple(inputs), tuple(pre_activations), model.layer_sizes)
    return (activation[0] if single else activation), cache


def backward(model: Model, cache: ForwardCache, upstream) -> Gradients:
    """Parameter gradients given dLoss/dlogits, summed over the cached pixels."""
    if cache.layer_sizes != model.layer_sizes:
        raise CacheMismatchError(
            f"Cache built for layers {cache.layer_sizes}, model has {model.layer_sizes}"
        )
    delta = np.atleast_2d(np.asarray(upstream, dtype=np.float64))
    if delta.shape != cache.pre_activations[-1].shape:
        raise CacheMismatchError(
            f"Upstream gradient has shape {delta.shape}, "
            f"cached logits have {cache.pre_activations[-1].shape}"
        )

    n_layers = len(model.weights)
    grad_w: list[np.ndarray] = [np.empty(0)] * n_layers
    grad_b: list[np.ndarray] = [np.empty(0)] * n_layers
    for i in reversed(range(n_layers)):
        grad_w[i] = cache.inputs[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (cache.pre_activations[i - 1] > 0)
    return Gradients(weights=grad_w, biases=grad_b)

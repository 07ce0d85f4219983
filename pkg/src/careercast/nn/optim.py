"""Adam optimizer."""

from __future__ import annotations

import numpy as np

from ..errors import NumericError, ParameterError


class Adam:
    """Bias-corrected Adam over an ordered list of parameter arrays.

    Moment slots are allocated on the first step and keyed by position, so
    the caller must pass parameters and gradients in the same order every
    time (layers guarantee this through ``param_items``/``grad_items``).
    Updates are applied in place.
    """

    def __init__(self, learning_rate=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8):
        if learning_rate <= 0:
            raise ParameterError(f"learning rate must be positive, got {learning_rate}")
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self._first_moment = None
        self._second_moment = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if len(params) != len(grads):
            raise ParameterError(
                f"got {len(params)} parameters but {len(grads)} gradients"
            )
        for idx, (p, g) in enumerate(zip(params, grads)):
            if p.shape != g.shape:
                raise ParameterError(
                    f"parameter {idx} has shape {p.shape} but its gradient {g.shape}"
                )
            if not np.all(np.isfinite(g)):
                raise NumericError(
                    f"non-finite gradient in parameter slot {idx} "
                    f"(shape {g.shape}); aborting training"
                )
        if self._first_moment is None:
            self._first_moment = [np.zeros_like(p) for p in params]
            self._second_moment = [np.zeros_like(p) for p in params]

        self.step_count += 1
        correction1 = 1.0 - self.beta1**self.step_count
        correction2 = 1.0 - self.beta2**self.step_count
        for p, g, m, v in zip(params, grads, self._first_moment, self._second_moment):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.learning_rate * (m / correction1) / (
                np.sqrt(v / correction2) + self.epsilon
            )

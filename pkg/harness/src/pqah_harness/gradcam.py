"""Grad-CAM computation for convolutional image classifiers.

The class-activation map for a class ``c`` is built from the activations
``A_k`` of a chosen convolutional stage: each channel is weighted by the
spatial mean of ``d y_c / d A_k`` and the weighted sum is rectified,

    cam = relu(sum_k mean(grad_k) * A_k)

The raw map lives at feature-map resolution; callers upsample and normalize
it afterwards (see :mod:`pqah_harness.extract`).
"""

from __future__ import annotations

from dataclasses import dataclass

import torch


@dataclass(frozen=True)
class CamResult:
    """Raw Grad-CAM output for one input.

    cam: 2-D float tensor at feature-map resolution, non-negative.
    target_class: class index the map explains.
    predicted_class: argmax of the logits for the same input.
    """

    cam: torch.Tensor
    target_class: int
    predicted_class: int


class GradCam:
    """Computes Grad-CAM maps from one target layer of a frozen model.

    The model is switched to eval mode. A forward hook captures the target
    layer's output; gradients are taken with ``torch.autograd.grad`` so no
    parameter ``.grad`` buffers are touched.
    """

    def __init__(self, model: torch.nn.Module, target_layer: torch.nn.Module):
        self.model = model.eval()
        self._activation: torch.Tensor | None = None
        target_layer.register_forward_hook(self._capture)

    def _capture(self, module, inputs, output) -> None:
        self._activation = output

    def compute(self, batch: torch.Tensor, target_class: int | None = None) -> CamResult:
        """Return the raw CAM for a single preprocessed input.

        batch: tensor of shape (1, C, H, W).
        target_class: class index to explain; defaults to the top-1
            prediction. Must lie within the model's output range.
        """
        if batch.ndim != 4 or batch.shape[0] != 1:
            raise ValueError("expected a single-image batch of shape (1, C, H, W)")
        self._activation = None
        with torch.enable_grad():
            logits = self.model(batch)
            if logits.ndim != 2:
                raise ValueError("model must return logits of shape (1, num_classes)")
            predicted = int(logits.argmax(dim=1).item())
            target = predicted if target_class is None else int(target_class)
            if not 0 <= target < logits.shape[1]:
                raise ValueError(
                    f"target class {target} outside model range [0, {logits.shape[1]})"
                )
            activation = self._activation
            if activation is None:
                raise ValueError("target layer was never reached during the forward pass")
            score = logits[0, target]
            grads = torch.autograd.grad(score, activation)[0]
        weights = grads.mean(dim=(2, 3), keepdim=True)
        cam = torch.relu((weights * activation).sum(dim=1))[0]
        return CamResult(cam=cam.detach(), target_class=target, predicted_class=predicted)

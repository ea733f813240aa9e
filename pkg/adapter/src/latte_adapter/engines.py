"""Role engines: the bodies behind the three protocol endpoints.

An engine receives the decoded RGB image as a numpy array plus the
request's token payload and returns the raw model output; the server
layer owns validation and index clamping. The HuggingFace-backed
engines load vision-encoder-decoder checkpoints lazily so the server
(and its tests) never import torch unless a checkpoint is configured.
"""

from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np

from .config import AdapterConfig, RoleConfig


class GenerateEngine(Protocol):
    def generate(self, image: np.ndarray) -> str: ...


class LocalizeEngine(Protocol):
    def localize(self, image: np.ndarray, tokens: Sequence[str]) -> int: ...


class RefineEngine(Protocol):
    def refine(self, image: np.ndarray, prompt_tokens: Sequence[str]) -> list[str]: ...


def attention_head_forward(
    hidden: np.ndarray, w_q: np.ndarray, w_k: np.ndarray
) -> tuple[np.ndarray, int]:
    """Query-by-last-token attention: ReLU projections of the final
    hidden state (query) and all hidden states (keys), softmax over the
    key scores, argmax with the lowest index winning ties."""
    query = np.maximum(w_q @ hidden[-1], 0.0)
    keys = np.maximum(hidden @ w_k.T, 0.0)
    scores = keys @ query
    scores = scores - scores.max()
    probs = np.exp(scores)
    probs /= probs.sum()
    return probs, int(np.argmax(probs))


class _HFBase:
    """Shared lazy loading of a vision-encoder-decoder checkpoint."""

    def __init__(self, role_config: RoleConfig, config: AdapterConfig):
        self.role_config = role_config
        self.config = config
        self._bundle = None

    def _load(self):
        if self._bundle is None:
            import torch
            from transformers import AutoProcessor, VisionEncoderDecoderModel

            model = VisionEncoderDecoderModel.from_pretrained(self.role_config.checkpoint)
            model.to(self.config.device)
            model.eval()
            processor = AutoProcessor.from_pretrained(self.role_config.checkpoint)
            self._bundle = (torch, model, processor)
        return self._bundle

    def _decode_kwargs(self) -> dict:
        if self.config.sampling_enabled:
            return {
                "do_sample": True,
                "temperature": self.config.sampling_temperature,
                "max_new_tokens": self.config.max_new_tokens,
            }
        return {"do_sample": False, "max_new_tokens": self.config.max_new_tokens}


class HFGenerateEngine(_HFBase):
    def generate(self, image: np.ndarray) -> str:
        torch, model, processor = self._load()
        pixel_values = processor(images=image, return_tensors="pt").pixel_values
        with torch.no_grad():
            output_ids = model.generate(
                pixel_values.to(self.config.device), **self._decode_kwargs()
            )
        return processor.batch_decode(output_ids, skip_special_tokens=True)[0]


class HFRefineEngine(_HFBase):
    def refine(self, image: np.ndarray, prompt_tokens: Sequence[str]) -> list[str]:
        torch, model, processor = self._load()
        pixel_values = processor(images=image, return_tensors="pt").pixel_values
        prompt = processor.tokenizer(
            " ".join(prompt_tokens), return_tensors="pt", add_special_tokens=False
        )
        with torch.no_grad():
            output_ids = model.generate(
                pixel_values.to(self.config.device),
                decoder_input_ids=prompt.input_ids.to(self.config.device),
                **self._decode_kwargs(),
            )
        completion_ids = output_ids[0, prompt.input_ids.shape[1] :]
        text = processor.tokenizer.decode(completion_ids, skip_special_tokens=True)
        return text.split()


class HFLocalizeEngine(_HFBase):
    """Decoder hidden states over the script tokens, scored by the
    attention head; head weights come from an .npz with w_q/w_k."""

    def __init__(self, role_config: RoleConfig, config: AdapterConfig):
        super().__init__(role_config, config)
        self._head = None

    def _head_weights(self, hidden_size: int) -> tuple[np.ndarray, np.ndarray]:
        if self._head is None:
            if self.role_config.head_weights:
                bundle = np.load(self.role_config.head_weights)
                self._head = (
                    np.asarray(bundle["w_q"], dtype=np.float64),
                    np.asarray(bundle["w_k"], dtype=np.float64),
                )
            else:
                eye = np.eye(hidden_size, dtype=np.float64)
                self._head = (eye, eye)
        return self._head

    def localize(self, image: np.ndarray, tokens: Sequence[str]) -> int:
        torch, model, processor = self._load()
        pixel_values = processor(images=image, return_tensors="pt").pixel_values
        script = processor.tokenizer(
            " ".join(tokens), return_tensors="pt", add_special_tokens=True
        )
        with torch.no_grad():
            outputs = model(
                pixel_values=pixel_values.to(self.config.device),
                decoder_input_ids=script.input_ids.to(self.config.device),
                output_hidden_states=True,
            )
        hidden = outputs.decoder_hidden_states[-1][0].cpu().numpy().astype(np.float64)
        w_q, w_k = self._head_weights(hidden.shape[1])
        _, model_index = attention_head_forward(hidden, w_q, w_k)
        # Model positions are sub-token; map proportionally onto the
        # protocol's 0-based script-token indices.
        if hidden.shape[0] <= 1:
            return 0
        return round(model_index * len(tokens) / (hidden.shape[0] - 1))


class RoleEngines:
    """The server's view: three optional engines."""

    def __init__(
        self,
        generate: GenerateEngine | None = None,
        localize: LocalizeEngine | None = None,
        refine: RefineEngine | None = None,
    ):
        self.generate = generate
        self.localize = localize
        self.refine = refine


def build_engines(config: AdapterConfig) -> RoleEngines:
    return RoleEngines(
        generate=HFGenerateEngine(config.generate, config) if config.generate else None,
        localize=HFLocalizeEngine(config.localize, config) if config.localize else None,
        refine=HFRefineEngine(config.refine, config) if config.refine else None,
    )

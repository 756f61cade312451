"""Policy bundles: parameter construction and feature pathways.

A base bundle holds the observation encoder, instruction encoder, cross-
modal attention, scoring head, and one waypoint predictor (section ``wp``).
Wrapping for post-training adds a projection head (g1 initialized to the
identity) plus frozen teacher / adapter-trainable student copies of the
predictor; the wrapped policy is behaviorally identical to the base until
trained.
"""

from dataclasses import dataclass, field

import numpy as np

from .autodiff import ParamSet, Tensor, linear, tanh
from .simworld.episodes import INSTRUCTION_DIM
from .waypointnet import MODEL_DIM, make_predictor_params

OBS_DIM = 32
HEADS = 4


@dataclass
class PolicyBundle:
    params: ParamSet
    kind: str  # "base" | "vil"
    obs_dim: int = OBS_DIM
    model_dim: int = MODEL_DIM
    meta: dict = field(default_factory=dict)

    @property
    def eval_predictor_prefix(self):
        return "student." if self.kind == "vil" else "wp."


def make_base_policy(seed, obs_dim=OBS_DIM, instr_dim=INSTRUCTION_DIM):
    rng = np.random.default_rng([seed, 0xB0])
    p = ParamSet()

    def w(name, rows, cols, scale=1.0):
        p.add(name, rng.normal(size=(rows, cols)) * scale / np.sqrt(rows))

    def b(name, cols):
        p.add(name, np.zeros(cols))

    w("enc.w", obs_dim + 2, MODEL_DIM)
    b("enc.b", MODEL_DIM)
    w("instr.w", instr_dim, MODEL_DIM)
    b("instr.b", MODEL_DIM)
    for i in range(2):
        for part in ("wq", "wk", "wv", "wo"):
            w(f"cmga.{i}.{part}", MODEL_DIM, MODEL_DIM)
        for part in ("bq", "bk", "bv", "bo"):
            b(f"cmga.{i}.{part}", MODEL_DIM)
    w("ffn.w1", MODEL_DIM, MODEL_DIM)
    b("ffn.b1", MODEL_DIM)
    w("ffn.w2", MODEL_DIM, 1)
    b("ffn.b2", 1)
    make_predictor_params(seed, depth_dim=obs_dim // 2, params=p, prefix="wp.")
    return PolicyBundle(params=p, kind="base", obs_dim=obs_dim)


def wrap_vil(base, seed=0):
    """Post-training wrapper: projection head + teacher/student predictors.

    g1 starts as the exact identity so the wrapped policy's behavior matches
    the base bit-for-bit before any updates.
    """
    if base.kind != "base":
        raise ValueError("can only wrap a base policy")
    rng = np.random.default_rng([seed, 0x71])
    p = ParamSet()
    for name, t in base.params.items():
        if name.startswith("wp."):
            continue
        p.add(name, t.data.copy(), trainable=t.trainable)
    p.add("proj.g1.w", np.eye(MODEL_DIM))
    p.add("proj.g1.b", np.zeros(MODEL_DIM))
    for layer in ("g2", "g3"):
        p.add(
            f"proj.{layer}.w",
            rng.normal(size=(MODEL_DIM, MODEL_DIM)) / np.sqrt(MODEL_DIM),
        )
        p.add(f"proj.{layer}.b", np.zeros(MODEL_DIM))
    wp = base.params.subset("wp.")
    for name, t in wp.items():
        p.add("teacher." + name, t.data.copy(), trainable=False)
    for name, t in wp.items():
        p.add("student." + name, t.data.copy(), trainable=name.startswith("fuse."))
    return PolicyBundle(params=p, kind="vil", obs_dim=base.obs_dim)


def encode_observation(bundle, obs):
    """[12, model_dim] encoder features from a panoramic observation."""
    from .simworld.render import heading_unit_vectors

    x = np.concatenate([np.asarray(obs.headings), heading_unit_vectors()], axis=1)
    return tanh(linear(Tensor(x), bundle.params["enc.w"], bundle.params["enc.b"]))


def project_task(f_enc, params):
    """Task-path projection: g1 only."""
    return linear(f_enc, params["proj.g1.w"], params["proj.g1.b"])


def project_contrast(f_enc, params):
    """Contrast-path projection: g3(tanh(g2(tanh(g1(x)))))."""
    h = tanh(project_task(f_enc, params))
    h = tanh(linear(h, params["proj.g2.w"], params["proj.g2.b"]))
    return linear(h, params["proj.g3.w"], params["proj.g3.b"])


def task_features(bundle, f_enc):
    if bundle.kind == "vil":
        return project_task(f_enc, bundle.params)
    return f_enc


def contrast_features(bundle, f_enc):
    if bundle.kind != "vil":
        raise ValueError("contrast features require a wrapped policy")
    return project_contrast(f_enc, bundle.params)


def encode_instruction_tokens(bundle, tokens):
    """[T, model_dim] instruction embedding from synthetic tokens."""
    return tanh(linear(Tensor(np.asarray(tokens)), bundle.params["instr.w"], bundle.params["instr.b"]))

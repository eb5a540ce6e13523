"""Invariant suites runnable from the CLI, the service and the test suite.

Each suite returns a list of named checks with pass/fail plus a detail
string, so callers can print one line per property.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from . import align
from .context import ContextFeatures, replicate_to_phonemes
from .errors import UsageError
from .frontend import PhonemeSequence
from .model import ModelConfig, ResidualCouplingBlock, ResidualCouplingLayer, SynthesisModel
from .model.duration import StochasticDurationPredictor
from .train.losses import duration_loss, kl_divergence


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _spans_from_lengths(lengths: list[int]) -> list[tuple[int, int]]:
    return [(i, n) for i, n in enumerate(lengths)]


# -- alignment -------------------------------------------------------------


def verify_mas(seeds: int = 100, max_p: int = 5, max_f: int = 8) -> list[Check]:
    """Reference DP against exhaustive enumeration: identical assignments
    and bit-identical totals."""
    mismatches = 0
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        p = int(rng.integers(1, max_p + 1))
        f = int(rng.integers(p, max_f + 1))
        # Integer-valued grids force frequent ties and exercise the tie rule.
        if seed % 3 == 0:
            loglik = rng.integers(-2, 3, size=(p, f)).astype(np.float64)
        else:
            loglik = rng.normal(size=(p, f))
        fast = align.mas(loglik)
        slow = align.brute_force_align(loglik)
        if fast.total != slow.total or not np.array_equal(
            fast.assignment, slow.assignment
        ):
            mismatches += 1
    return [
        Check(
            name="mas-oracle-equivalence",
            passed=mismatches == 0,
            detail=f"{seeds - mismatches}/{seeds} instances match the oracle exactly",
        )
    ]


def verify_mas_shift(seeds: int = 100) -> list[Check]:
    changed = 0
    for seed in range(seeds):
        rng = np.random.default_rng(1000 + seed)
        p = int(rng.integers(1, 6))
        f = int(rng.integers(p, 9))
        loglik = rng.normal(size=(p, f))
        c = float(rng.normal() * 10)
        base = align.mas(loglik)
        shifted = align.mas(loglik + c)
        if not np.array_equal(base.assignment, shifted.assignment):
            changed += 1
    return [
        Check(
            name="mas-shift-invariance",
            passed=changed == 0,
            detail=f"assignment unchanged under constant shift on {seeds} instances",
        )
    ]


# -- flow -------------------------------------------------------------------


def verify_flow(n: int = 100, frames: int = 40, channels: int = 16) -> list[Check]:
    torch.manual_seed(0)
    flow = ResidualCouplingBlock(channels, 5, 2, 2, gin_channels=channels)
    # Perturb away from the identity so the round trip is non-trivial.
    with torch.no_grad():
        for layer in flow.flows:
            if isinstance(layer, ResidualCouplingLayer):
                layer.post.weight.normal_(0.0, 0.5)
                layer.post.bias.normal_(0.0, 0.5)
    flow.eval()
    mask = torch.ones(1, 1, frames)
    g = torch.randn(1, channels, 1)
    worst = 0.0
    with torch.no_grad():
        for seed in range(n):
            gen = torch.Generator().manual_seed(seed)
            z = torch.randn(1, channels, frames, generator=gen)
            y = flow(z, mask, g=g, reverse=False)
            z_back = flow(y, mask, g=g, reverse=True)
            worst = max(worst, float((z - z_back).abs().max()))
    return [
        Check(
            name="flow-invertibility",
            passed=worst <= 1e-4,
            detail=f"max |z - f_inv(f(z))| = {worst:.2e} over {n} latents",
        )
    ]


# -- context ---------------------------------------------------------------


def verify_replication(cases: int = 1000) -> list[Check]:
    rng = np.random.default_rng(7)
    failures = 0
    for _ in range(cases):
        n_words = int(rng.integers(1, 9))
        lengths = [int(rng.integers(1, 6)) for _ in range(n_words)]
        dim = int(rng.integers(1, 9))
        rows = rng.normal(size=(n_words, dim)).astype(np.float32)
        seq = PhonemeSequence(
            phonemes=["a"] * sum(lengths),
            word_spans=_spans_from_lengths(lengths),
        )
        out = replicate_to_phonemes(
            ContextFeatures(level="word", matrix=rows), seq
        )
        cursor = 0
        for w, span in seq.word_spans:
            block = out.matrix[cursor : cursor + span]
            if not np.array_equal(block, np.repeat(rows[w : w + 1], span, axis=0)):
                failures += 1
                break
            cursor += span
    return [
        Check(
            name="replication-exactness",
            passed=failures == 0,
            detail=f"row ownership exact on {cases - failures}/{cases} span structures",
        )
    ]


def _tiny_config(use_context: bool) -> ModelConfig:
    return ModelConfig(
        n_speakers=4,
        hidden_dim=32,
        filter_dim=64,
        n_heads=2,
        n_encoder_blocks=2,
        dropout=0.0,
        flow_layers=2,
        flow_wn_layers=2,
        posterior_wn_layers=2,
        duration_flow_layers=2,
        duration_filter_dim=16,
        mel_channels=20,
        sample_rate=16000,
        fft_size=256,
        hop_size=64,
        win_size=256,
        upsample_rates=(4, 4, 4),
        upsample_kernel_sizes=(8, 8, 8),
        upsample_initial_channel=32,
        resblock_kernel_sizes=(3,),
        resblock_dilations=((1, 3),),
        disc_scales=2,
        disc_layers=3,
        use_context=use_context,
        context_dim=6,
    )


def verify_fusion() -> list[Check]:
    """Zero projection makes fusion the identity, and a context-enabled
    model with zero projection matches the context-free model bit for bit."""
    torch.manual_seed(3)
    cfg_off = _tiny_config(use_context=False)
    cfg_on = _tiny_config(use_context=True)
    vocab_size = 11
    torch.manual_seed(42)
    model_off = SynthesisModel(cfg_off, vocab_size)
    torch.manual_seed(43)
    model_on = SynthesisModel(cfg_on, vocab_size)
    # Align shared weights; the context projection stays at its zero init.
    model_on.load_state_dict(model_off.state_dict(), strict=False)
    model_off.eval()
    model_on.eval()

    ids = torch.randint(1, vocab_size, (1, 7))
    lengths = torch.tensor([7])
    lang = torch.tensor([2])
    spk = torch.tensor([1])
    context = torch.randn(1, 7, cfg_on.context_dim)
    with torch.no_grad():
        mu_off, logvar_off, hidden_off, _ = model_off.encode_text(
            ids, lengths, None, lang, spk
        )
        mu_on, logvar_on, hidden_on, _ = model_on.encode_text(
            ids, lengths, context, lang, spk
        )
    identical = (
        torch.equal(mu_off, mu_on)
        and torch.equal(logvar_off, logvar_on)
        and torch.equal(hidden_off, hidden_on)
    )
    checks = [
        Check(
            name="fusion-zero-projection-identity",
            passed=identical,
            detail="context on (zero projection) vs context off: bit-equal encoder outputs",
        )
    ]

    fusion = model_on.text_encoder.ctx_proj
    emb = torch.randn(1, 7, cfg_on.hidden_dim)
    fused = emb + fusion(context)
    checks.append(
        Check(
            name="fusion-additive-identity",
            passed=torch.equal(fused, emb),
            detail="zero-initialized projection leaves embeddings unchanged",
        )
    )
    return checks


# -- padding ----------------------------------------------------------------


def verify_padding() -> list[Check]:
    torch.manual_seed(11)
    cfg = _tiny_config(use_context=False)
    vocab_size = 13
    model = SynthesisModel(cfg, vocab_size)
    model.eval()

    lengths = [5, 9]
    ids_full = torch.zeros(2, max(lengths), dtype=torch.long)
    rows = []
    for i, n in enumerate(lengths):
        row = torch.randint(1, vocab_size, (n,))
        rows.append(row)
        ids_full[i, :n] = row
    lang = torch.tensor([0, 3])
    spk = torch.tensor([1, 2])
    with torch.no_grad():
        mu_b, logvar_b, hidden_b, _ = model.encode_text(
            ids_full, torch.tensor(lengths), None, lang, spk
        )
    worst = 0.0
    for i, n in enumerate(lengths):
        with torch.no_grad():
            mu_s, logvar_s, hidden_s, _ = model.encode_text(
                rows[i].unsqueeze(0),
                torch.tensor([n]),
                None,
                lang[i : i + 1],
                spk[i : i + 1],
            )
        worst = max(
            worst,
            float((mu_b[i, :, :n] - mu_s[0]).abs().max()),
            float((logvar_b[i, :, :n] - logvar_s[0]).abs().max()),
            float((hidden_b[i, :, :n] - hidden_s[0]).abs().max()),
        )
    checks = [
        Check(
            name="padding-invariance-encoder",
            passed=worst <= 1e-4,
            detail=f"padded batch vs items alone: max |diff| = {worst:.2e}",
        )
    ]

    # Masked loss terms under doubled padding with junk fill.
    gen = torch.Generator().manual_seed(5)
    b, h, f_valid, f_pad1, f_pad2 = 2, 8, (6, 9), 9, 14
    mask1 = torch.zeros(b, 1, f_pad1)
    mask2 = torch.zeros(b, 1, f_pad2)
    for i, n in enumerate(f_valid):
        mask1[i, :, :n] = 1
        mask2[i, :, :n] = 1

    def grow(x, fill=7.3):
        out = torch.full((*x.shape[:-1], f_pad2), fill)
        out[..., :f_pad1] = x
        return out

    z_p = torch.randn(b, h, f_pad1, generator=gen) * mask1
    logvar_q = torch.randn(b, h, f_pad1, generator=gen) * mask1
    mu_p = torch.randn(b, h, f_pad1, generator=gen) * mask1
    logvar_p = torch.randn(b, h, f_pad1, generator=gen) * mask1
    eps = torch.randn(b, h, f_pad1, generator=gen) * mask1
    kl1 = kl_divergence(z_p, logvar_q, mu_p, logvar_p, eps, mask1)
    kl2 = kl_divergence(
        grow(z_p), grow(logvar_q), grow(mu_p), grow(logvar_p), grow(eps), mask2
    )
    kl_diff = float((kl1 - kl2).abs())

    torch.manual_seed(21)
    sdp = StochasticDurationPredictor(h, 16, 3, 2, gin_channels=h)
    sdp.eval()
    p_valid, p_pad1, p_pad2 = (3, 5), 5, 8
    pmask1 = torch.zeros(b, 1, p_pad1)
    pmask2 = torch.zeros(b, 1, p_pad2)
    for i, n in enumerate(p_valid):
        pmask1[i, :, :n] = 1
        pmask2[i, :, :n] = 1
    hidden = torch.randn(b, h, p_pad1, generator=gen) * pmask1
    durations = torch.randint(1, 5, (b, p_pad1), generator=gen)
    g = torch.randn(b, h, 1, generator=gen)
    u = torch.rand(b, p_pad1, generator=gen)
    v = torch.randn(b, p_pad1, generator=gen)

    def grow2(x, fill):
        out = torch.full((*x.shape[:-1], p_pad2), fill, dtype=x.dtype)
        out[..., :p_pad1] = x
        return out

    with torch.no_grad():
        nll1 = sdp.nll(hidden, pmask1, durations, g=g, noise=(u, v))
        dur1 = duration_loss(nll1, pmask1)
        nll2 = sdp.nll(
            grow2(hidden, 7.3),
            pmask2,
            grow2(durations, 7),
            g=g,
            noise=(grow2(u, 0.5), grow2(v, 7.3)),
        )
        dur2 = duration_loss(nll2, pmask2)
    dur_diff = float((dur1 - dur2).abs())

    checks.append(
        Check(
            name="padding-invariance-losses",
            passed=kl_diff <= 1e-5 and dur_diff <= 1e-5,
            detail=f"kl diff = {kl_diff:.2e}, duration diff = {dur_diff:.2e} under doubled padding",
        )
    )
    return checks


# -- gradients ---------------------------------------------------------------


def _relative_errors(params: torch.Tensor, loss_fn, n_probe: int, h: float, rng):
    """Central finite differences on sampled entries of one tensor."""
    if params.grad is not None:
        params.grad = None
    loss = loss_fn()
    loss.backward()
    grad = params.grad.detach().clone()
    params.requires_grad_(False)
    errors = []
    flat = params.data.view(-1)
    gflat = grad.view(-1)
    idx = rng.choice(flat.shape[0], size=min(n_probe, flat.shape[0]), replace=False)
    with torch.no_grad():
        for i in idx:
            orig = float(flat[i])
            flat[i] = orig + h
            up = float(loss_fn())
            flat[i] = orig - h
            down = float(loss_fn())
            flat[i] = orig
            fd = (up - down) / (2 * h)
            an = float(gflat[i])
            errors.append(abs(fd - an) / max(abs(fd), abs(an), 1e-8))
    return max(errors)


def verify_gradients(n_probe: int = 16) -> list[Check]:
    """Analytic gradients vs central differences at float64."""
    rng = np.random.default_rng(17)
    torch.manual_seed(29)

    coupling = ResidualCouplingLayer(8, 3, 2, gin_channels=4).double()
    with torch.no_grad():
        coupling.post.weight.normal_(0.0, 0.3)
        coupling.post.bias.normal_(0.0, 0.3)
    x = torch.randn(1, 8, 10, dtype=torch.float64)
    mask = torch.ones(1, 1, 10, dtype=torch.float64)
    g = torch.randn(1, 4, 1, dtype=torch.float64)
    probe = torch.randn(1, 8, 10, dtype=torch.float64)

    def coupling_loss():
        return (coupling(x, mask, g=g) * probe).sum()

    err_coupling = _relative_errors(
        coupling.enc.in_layers[0].weight, coupling_loss, n_probe, 1e-5, rng
    )

    sdp = StochasticDurationPredictor(8, 16, 3, 2, gin_channels=8).double()
    hidden = torch.randn(1, 8, 6, dtype=torch.float64)
    pmask = torch.ones(1, 1, 6, dtype=torch.float64)
    durations = torch.randint(1, 5, (1, 6))
    gd = torch.randn(1, 8, 1, dtype=torch.float64)
    u = torch.rand(1, 6, dtype=torch.float64)
    v = torch.randn(1, 6, dtype=torch.float64)

    def sdp_loss():
        return sdp.nll(hidden, pmask, durations, g=gd, noise=(u, v)).sum()

    err_head = _relative_errors(sdp.head.weight, sdp_loss, n_probe, 1e-5, rng)

    return [
        Check(
            name="gradcheck-coupling",
            passed=err_coupling <= 1e-3,
            detail=f"coupling layer max relative error {err_coupling:.2e}",
        ),
        Check(
            name="gradcheck-duration-head",
            passed=err_head <= 1e-3,
            detail=f"duration head max relative error {err_head:.2e}",
        ),
    ]


# -- dispatch ----------------------------------------------------------------

SUITES = {
    "mas": lambda quick: verify_mas(seeds=50 if quick else 100),
    "shift": lambda quick: verify_mas_shift(seeds=50 if quick else 100),
    "flow": lambda quick: verify_flow(n=25 if quick else 100),
    "replication": lambda quick: verify_replication(cases=200 if quick else 1000),
    "fusion": lambda quick: verify_fusion(),
    "padding": lambda quick: verify_padding(),
    "gradients": lambda quick: verify_gradients(n_probe=8 if quick else 16),
}


def run_suite(name: str, quick: bool = False) -> list[Check]:
    if name == "all":
        checks = []
        for suite in SUITES.values():
            checks.extend(suite(quick))
        return checks
    if name not in SUITES:
        raise UsageError(
            f"unknown verify suite {name!r}; choose from "
            f"{', '.join([*SUITES, 'all'])}"
        )
    return SUITES[name](quick)

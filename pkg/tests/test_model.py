import pytest
import torch

from conftest import tiny_model_config
from multivox.errors import ConfigError, OutOfRangeIdError
from multivox.model import (
    ModelConfig,
    SynthesisModel,
    build_discriminator,
    expand_by_durations,
)


@pytest.fixture(scope="module")
def model():
    torch.manual_seed(0)
    m = SynthesisModel(tiny_model_config(), vocab_size=17)
    m.eval()
    return m


def _text_batch(p=5, vocab=17, lang=1, spk=0):
    torch.manual_seed(7)
    ids = torch.randint(1, vocab, (1, p))
    return ids, torch.tensor([p]), torch.tensor([lang]), torch.tensor([spk])


class TestEncodeText:
    def test_shape_contract(self, model):
        ids, lengths, lang, spk = _text_batch(p=5)
        mu, logvar, hidden, mask = model.encode_text(ids, lengths, None, lang, spk)
        h = model.cfg.hidden_dim
        assert mu.shape == (1, h, 5)
        assert logvar.shape == (1, h, 5)
        assert hidden.shape == (1, h, 5)

    def test_language_changes_output(self, model):
        ids, lengths, _, spk = _text_batch()
        with torch.no_grad():
            a, _, _, _ = model.encode_text(ids, lengths, None, torch.tensor([0]), spk)
            b, _, _, _ = model.encode_text(ids, lengths, None, torch.tensor([5]), spk)
        assert float((a - b).abs().max()) > 0

    def test_out_of_range_language(self, model):
        ids, lengths, _, spk = _text_batch()
        with pytest.raises(OutOfRangeIdError):
            model.encode_text(ids, lengths, None, torch.tensor([7]), spk)

    def test_out_of_range_speaker(self, model):
        ids, lengths, lang, _ = _text_batch()
        with pytest.raises(OutOfRangeIdError):
            model.encode_text(ids, lengths, None, lang, torch.tensor([99]))

    def test_context_presence_mismatch(self, model):
        ids, lengths, lang, spk = _text_batch()
        with pytest.raises(ConfigError):
            model.encode_text(ids, lengths, torch.randn(1, 5, 6), lang, spk)

    def test_context_required_when_enabled(self):
        torch.manual_seed(1)
        m = SynthesisModel(tiny_model_config(use_context=True), vocab_size=17)
        ids, lengths, lang, spk = _text_batch()
        with pytest.raises(ConfigError):
            m.encode_text(ids, lengths, None, lang, spk)

    def test_logvar_within_clamp(self, model):
        ids, lengths, lang, spk = _text_batch(p=9)
        with torch.no_grad():
            _, logvar, _, _ = model.encode_text(ids, lengths, None, lang, spk)
        assert float(logvar.min()) >= model.cfg.logvar_min
        assert float(logvar.max()) <= model.cfg.logvar_max


class TestPosterior:
    def test_eval_mode_returns_mean(self, model):
        spec = torch.randn(1, model.cfg.spec_channels, 12).abs()
        z, mu, logvar, eps, mask = model.encode_posterior(
            spec, torch.tensor([12]), torch.tensor([0])
        )
        assert torch.equal(z, mu * mask)
        assert float(eps.abs().max()) == 0

    def test_training_mode_reproducible(self, model):
        spec = torch.randn(1, model.cfg.spec_channels, 12).abs()
        model.train()
        try:
            gen = torch.Generator().manual_seed(11)
            z1, *_ = model.encode_posterior(spec, torch.tensor([12]), torch.tensor([0]), generator=gen)
            gen = torch.Generator().manual_seed(11)
            z2, *_ = model.encode_posterior(spec, torch.tensor([12]), torch.tensor([0]), generator=gen)
        finally:
            model.eval()
        assert torch.equal(z1, z2)

    def test_shape(self, model):
        spec = torch.randn(1, model.cfg.spec_channels, 40).abs()
        z, *_ = model.encode_posterior(spec, torch.tensor([40]), torch.tensor([1]))
        assert z.shape == (1, model.cfg.hidden_dim, 40)


class TestFlow:
    def test_identity_at_init(self, model):
        z = torch.randn(1, model.cfg.hidden_dim, 10)
        mask = torch.ones(1, 1, 10)
        torch.manual_seed(2)
        fresh = SynthesisModel(tiny_model_config(), vocab_size=17).eval()
        with torch.no_grad():
            y = fresh.flow_forward(z, mask, torch.tensor([0]))
        assert torch.equal(y, z)

    def test_round_trip(self, model):
        with torch.no_grad():
            for layer in model.flow.flows:
                if hasattr(layer, "post"):
                    layer.post.weight.normal_(0, 0.3)
                    layer.post.bias.normal_(0, 0.3)
        z = torch.randn(1, model.cfg.hidden_dim, 40)
        mask = torch.ones(1, 1, 40)
        with torch.no_grad():
            y = model.flow_forward(z, mask, torch.tensor([1]))
            back = model.flow_inverse(y, mask, torch.tensor([1]))
        assert float((z - back).abs().max()) <= 1e-4

    def test_speaker_conditioning_live_after_step(self):
        torch.manual_seed(3)
        cfg = tiny_model_config()
        m = SynthesisModel(cfg, vocab_size=17)
        flow = m.flow
        opt = torch.optim.SGD(flow.parameters(), lr=0.5)
        z = torch.randn(1, cfg.hidden_dim, 8)
        mask = torch.ones(1, 1, 8)
        g = m.spk_emb(torch.tensor([0])).unsqueeze(-1)
        loss = flow(z, mask, g=g).pow(2).mean()
        loss.backward()
        opt.step()
        m.eval()
        with torch.no_grad():
            a = m.flow_forward(z, mask, torch.tensor([0]))
            b = m.flow_forward(z, mask, torch.tensor([1]))
        assert float((a - b).abs().max()) > 0


class TestDurations:
    def test_deterministic_at_zero_noise(self, model):
        ids, lengths, lang, spk = _text_batch()
        with torch.no_grad():
            _, _, hidden, mask = model.encode_text(ids, lengths, None, lang, spk)
            w1 = model.predict_durations(hidden, mask, lang, spk, 0.0)
            w2 = model.predict_durations(hidden, mask, lang, spk, 0.0)
        assert torch.equal(w1, w2)

    def test_positive_over_random_inputs(self, model):
        for seed in range(100):
            gen = torch.Generator().manual_seed(seed)
            hidden = torch.randn(1, model.cfg.hidden_dim, 6, generator=gen)
            mask = torch.ones(1, 1, 6)
            with torch.no_grad():
                w = model.predict_durations(
                    hidden,
                    mask,
                    torch.tensor([seed % 7]),
                    torch.tensor([seed % 4]),
                    noise_scale=0.8,
                    generator=gen,
                )
            assert bool((w > 0).all())

    def test_shape(self, model):
        ids, lengths, lang, spk = _text_batch(p=5)
        with torch.no_grad():
            _, _, hidden, mask = model.encode_text(ids, lengths, None, lang, spk)
            w = model.predict_durations(hidden, mask, lang, spk, 0.0)
        assert w.shape == (1, 5)

    def test_negative_noise_rejected(self, model):
        ids, lengths, lang, spk = _text_batch()
        with torch.no_grad():
            _, _, hidden, mask = model.encode_text(ids, lengths, None, lang, spk)
        with pytest.raises(ConfigError):
            model.predict_durations(hidden, mask, lang, spk, -0.1)


class TestDecoder:
    def test_upsampling_arithmetic(self, model):
        z = torch.randn(1, model.cfg.hidden_dim, 32)
        with torch.no_grad():
            wave = model.decode_waveform(z, torch.tensor([0]))
        assert wave.shape == (1, 1, 32 * model.cfg.hop_size)

    def test_bounded_output(self, model):
        z = torch.randn(1, model.cfg.hidden_dim, 16) * 5
        with torch.no_grad():
            wave = model.decode_waveform(z, torch.tensor([1]))
        assert float(wave.abs().max()) <= 1.0

    def test_zero_latent_zero_final_layer_is_silent(self):
        torch.manual_seed(4)
        m = SynthesisModel(tiny_model_config(), vocab_size=17).eval()
        with torch.no_grad():
            m.decoder.conv_post.weight.zero_()
        z = torch.zeros(1, m.cfg.hidden_dim, 16)
        with torch.no_grad():
            wave = m.decode_waveform(z, torch.tensor([0]))
        rms = float(wave.pow(2).mean().sqrt())
        assert rms < 1e-3


class TestDiscriminator:
    def test_eval_deterministic(self):
        torch.manual_seed(5)
        disc = build_discriminator(tiny_model_config()).eval()
        y = torch.randn(1, 1, 1024)
        with torch.no_grad():
            s1, _ = disc(y)
            s2, _ = disc(y)
        for a, b in zip(s1, s2):
            assert torch.equal(a, b)

    def test_scores_finite_on_noise(self):
        torch.manual_seed(6)
        disc = build_discriminator(tiny_model_config())
        scores, fmaps = disc(torch.randn(2, 1, 2048))
        for s in scores:
            assert torch.isfinite(s).all()

    def test_feature_map_count_matches_depth(self):
        cfg = tiny_model_config()
        disc = build_discriminator(cfg)
        _, fmaps = disc(torch.randn(1, 1, 1024))
        assert len(fmaps) == cfg.disc_scales
        for stack in fmaps:
            assert len(stack) == cfg.disc_layers


class TestExpand:
    def test_repeats_by_duration(self):
        mu = torch.arange(6, dtype=torch.float32).reshape(1, 2, 3)
        logvar = -mu
        durations = torch.tensor([[2, 1, 3]])
        mu_f, logvar_f, mask = expand_by_durations(
            mu, logvar, durations, torch.tensor([6])
        )
        assert mu_f.shape == (1, 2, 6)
        assert mu_f[0, 0].tolist() == [0, 0, 1, 2, 2, 2]
        assert torch.equal(logvar_f, -mu_f)


class TestSpeakerExtension:
    def test_rows_appended_with_mean_init(self):
        torch.manual_seed(8)
        m = SynthesisModel(tiny_model_config(n_speakers=3), vocab_size=17)
        before = m.spk_emb.weight.data.clone()
        m.extend_speakers(2)
        after = m.spk_emb.weight.data
        assert after.shape[0] == 5
        assert torch.equal(after[:3], before)
        assert torch.allclose(after[3], before.mean(dim=0))
        assert m.cfg.n_speakers == 5


def test_config_validation():
    with pytest.raises(ConfigError):
        ModelConfig(n_languages=6)
    with pytest.raises(ConfigError):
        tiny_model_config(flow_layers=3)
    with pytest.raises(ConfigError):
        tiny_model_config(upsample_rates=(4, 4), upsample_kernel_sizes=(8, 8))
    cfg = tiny_model_config()
    rebuilt = ModelConfig.from_dict(cfg.to_dict())
    assert rebuilt == cfg
    with pytest.raises(ConfigError):
        ModelConfig.from_dict({"nonsense": 1})

import pytest
import torch

from multivox.data import generate_synthetic_corpus, load_manifest
from multivox.model.config import ModelConfig
from multivox.runconfig import RunConfig, load_config
from multivox.train.corpus import PreparedCorpus
from multivox.train.loop import Trainer


def tiny_model_config(**overrides) -> ModelConfig:
    base = dict(
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
        use_context=False,
        context_dim=6,
    )
    base.update(overrides)
    return ModelConfig(**base)


def tiny_run_config(**model_overrides) -> RunConfig:
    cfg = RunConfig(model=tiny_model_config(**model_overrides))
    cfg.train.batch_size = 4
    cfg.train.segment_frames = 16
    cfg.train.checkpoint_interval = 0
    cfg.train.log_interval = 1000
    return cfg.validate()


@pytest.fixture(scope="session")
def desk_cfg():
    return load_config("desk")


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory):
    """Two speakers, two languages; enough for most training tests."""
    root = tmp_path_factory.mktemp("corpus")
    generate_synthetic_corpus(
        root,
        seed=7,
        speakers=("spk00", "spk01"),
        languages=("english", "hindi"),
        utterances_per_pair=2,
    )
    return root


@pytest.fixture(scope="session")
def small_utterances(small_corpus_dir):
    return load_manifest(small_corpus_dir / "manifest.jsonl")


@pytest.fixture(scope="session")
def full_corpus_dir(tmp_path_factory):
    """All 14 speakers x 7 languages for pretrain/fine-tune contracts."""
    root = tmp_path_factory.mktemp("full_corpus")
    generate_synthetic_corpus(root, seed=21)
    return root


@pytest.fixture(scope="session")
def mini_checkpoint(tmp_path_factory, full_corpus_dir):
    """A tiny trained checkpoint over 14 speakers for synth-facing tests."""
    workdir = tmp_path_factory.mktemp("mini_run")
    cfg = tiny_run_config()
    cfg.train.max_iterations = 2
    cfg.train.seed = 3
    # 16 kHz corpus at hop 64: feasibility is generous, but keep it small.
    utterances = load_manifest(full_corpus_dir / "manifest.jsonl")[:8]
    corpus = PreparedCorpus(utterances, cfg)
    trainer = Trainer(cfg, corpus, workdir)
    trainer.train()
    return workdir / "checkpoint_latest.ckpt"


@pytest.fixture(autouse=True)
def _single_thread():
    torch.set_num_threads(2)

import pytest

from synth import speech_like, train_profile


@pytest.fixture(scope="session")
def corpus_16k():
    """Shared speech-like corpus: 128 ms windows (2048 samples) at 16 kHz."""
    sr, window = 16000, 2048
    train = [speech_like(100 + i, window, sr, 6) for i in range(48)]
    test = [speech_like(900 + i, window, sr, 6) for i in range(40)]
    return {"sr": sr, "window": window, "window_ms": 128.0, "train": train, "test": test}


@pytest.fixture(scope="session")
def profile_085(corpus_16k):
    """Single-ratio profile trained at R=0.85 on the shared corpus seeds."""
    return train_profile(
        corpus_16k["sr"],
        corpus_16k["window"],
        16,
        (0.85,),
        range(100, 148),
        6,
        corpus_16k["window_ms"],
    )

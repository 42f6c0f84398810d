import numpy as np
import pytest

from ssimuse import BINARY, VELOCITY, Clip, PianoRoll, load_directory
from ssimuse.synth import synth_corpus

CORPUS_SEED = 11
CORPUS_PIECES = 40


def make_clip(events, steps=256, flavor=VELOCITY, steps_per_bar=16, source="fix"):
    """Clip from (step, pitch, velocity) triples; binary flavor stores 1s."""
    grid = np.zeros((steps, 128), dtype=np.uint8)
    for step, pitch, velocity in events:
        grid[step, pitch] = 1 if flavor == BINARY else velocity
    roll = PianoRoll(grid=grid, flavor=flavor, steps_per_bar=steps_per_bar,
                     source_id=source)
    return Clip(roll=roll, origin=(source, 0))


def random_clip(rng, steps=256, density=0.3, flavor=VELOCITY, source="rand"):
    """Sparse random clip: about ``density`` onsets per step."""
    events = []
    for step in range(steps):
        for _ in range(rng.poisson(density)):
            events.append((step, int(rng.integers(30, 100)), int(rng.integers(1, 128))))
    return make_clip(events, steps=steps, flavor=flavor, source=source)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("corpus")
    synth_corpus(directory, n_pieces=CORPUS_PIECES, seed=CORPUS_SEED, style="songs")
    return directory


@pytest.fixture(scope="session")
def corpus_clips(corpus_dir):
    clips = load_directory(corpus_dir)
    assert len(clips) >= CORPUS_PIECES
    return clips

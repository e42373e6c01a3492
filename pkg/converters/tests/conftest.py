import numpy as np
import pytest
import scipy.io

RAW_SWOW_CSV = """participantID,age,cue,R1,R2,R3
1,33,kite,string,sky,wind
2,41,kite,String,beach,NA
3,28,kite,sky,string,paper
1,33,Cheese,milk,yellow,mouse
2,41,cheese,milk,No more responses,NA
3,28,cheese,holes,milk,Unknown word
1,33,ice cream,cold,summer,vanilla
"""


@pytest.fixture
def raw_swow(tmp_path):
    path = tmp_path / "raw.csv"
    path.write_text(RAW_SWOW_CSV)
    return path


def write_mat_archive(path, words, epochs, voxels=6, subject="P1", seed=0,
                      drop_meta_field=None):
    """Synthetic archive mirroring the 60-noun study's .mat layout."""
    rng = np.random.default_rng(seed)
    n = len(words)
    data = np.empty((n, 1), dtype=object)
    for i in range(n):
        data[i, 0] = rng.normal(size=(1, voxels))
    info = np.zeros((1, n), dtype=[("word", "O"), ("epoch", "O"), ("cond", "O")])
    for i in range(n):
        info[0, i] = (words[i], epochs[i], "stim")
    meta = {
        "nvoxels": voxels,
        "dimx": 3,
        "dimy": 2,
        "dimz": 1,
        "ntrials": n,
        "study": "synthetic",
        "subject": subject,
    }
    if drop_meta_field:
        meta.pop(drop_meta_field)
    scipy.io.savemat(path, {"data": data, "info": info, "meta": meta})
    return path


# a miniature but format-valid WordNet 3.0 data.noun file:
#   dog          -> hypernym -> {canine, cur}
#   {canine,cur} -> hyponym  -> dog, plus one lexical antonym pointer
#   ice_cream    -> hypernym -> dog (nonsense content, valid structure)
MINI_DATA_NOUN = (
    "  1 This mini database header line must be skipped by parsers.\n"
    "00001740 05 n 01 dog 0 001 @ 00002137 n 0000 | a domesticated canid\n"
    "00002137 05 n 02 canine 0 cur 1 002 ~ 00001740 n 0000 ! 00003257 n 0101 "
    "| a canid of the family Canidae\n"
    "00003257 05 n 01 ice_cream 0 001 @ 00001740 n 0000 | frozen dessert\n"
)


@pytest.fixture
def mini_wordnet(tmp_path):
    wn_dir = tmp_path / "wn"
    wn_dir.mkdir()
    (wn_dir / "data.noun").write_text(MINI_DATA_NOUN)
    return wn_dir

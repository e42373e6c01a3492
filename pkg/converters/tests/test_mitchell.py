import os
from pathlib import Path

import numpy as np
import pytest
import scipy.io

from kbconvert.mitchell import convert_mitchell

from conftest import write_mat_archive

MAGIC = b"KBFMRI1\n"


def parse_canonical(path):
    raw = Path(path).read_bytes()
    assert raw.startswith(MAGIC)
    body = raw[len(MAGIC):]
    marker = body.index(b"\nend\n")
    lines = body[:marker].decode().split("\n")
    payload = body[marker + 5:]
    fields = dict(line.split("\t", 1) for line in lines[:4])
    word_lines = [line.split("\t") for line in lines[4:]]
    return fields, word_lines, payload


class TestConvertMitchell:
    def test_regroups_trials_by_word(self, tmp_path):
        words = ["bear", "dog", "bear", "dog", "bear", "dog"]
        epochs = [1, 1, 2, 2, 3, 3]
        mat = write_mat_archive(tmp_path / "p1.mat", words, epochs)
        out_path, report = convert_mitchell(mat, tmp_path / "out")
        assert out_path.name == "P1.fmri"
        fields, word_lines, payload = parse_canonical(out_path)
        assert fields["participant"] == "P1"
        assert fields["voxel_count"] == "6"
        assert fields["grid"] == "3x2x1\t3x3x6 mm"
        assert word_lines == [["bear", "3"], ["dog", "3"]]
        assert len(payload) == 6 * 6 * 4
        assert report.records_read == 6
        assert report.records_written == 6
        report.check_balance()

    def test_presentations_ordered_by_epoch(self, tmp_path):
        words = ["dog", "dog", "dog"]
        epochs = [3, 1, 2]
        mat = write_mat_archive(tmp_path / "p1.mat", words, epochs, voxels=4, seed=5)
        out_path, _report = convert_mitchell(mat, tmp_path / "out")
        _f, _w, payload = parse_canonical(out_path)
        got = np.frombuffer(payload, dtype="<f4").reshape(3, 4)
        archive = scipy.io.loadmat(mat, squeeze_me=True, struct_as_record=False)
        trials = [np.asarray(t).ravel() for t in archive["data"]]
        expected = np.stack([trials[1], trials[2], trials[0]]).astype(np.float32)
        assert np.array_equal(got, expected)

    def test_deterministic(self, tmp_path):
        mat = write_mat_archive(tmp_path / "p1.mat", ["a", "b"], [1, 1])
        p1, _ = convert_mitchell(mat, tmp_path / "one")
        p2, _ = convert_mitchell(mat, tmp_path / "two")
        assert p1.read_bytes() == p2.read_bytes()

    def test_missing_meta_field_errors(self, tmp_path):
        mat = write_mat_archive(
            tmp_path / "p1.mat", ["a"], [1], drop_meta_field="nvoxels"
        )
        with pytest.raises(ValueError, match="nvoxels"):
            convert_mitchell(mat, tmp_path / "out")

    def test_truncated_archive_errors(self, tmp_path):
        mat = write_mat_archive(tmp_path / "p1.mat", ["a", "b"], [1, 1])
        mat.write_bytes(mat.read_bytes()[:60])
        with pytest.raises(ValueError, match="unreadable"):
            convert_mitchell(mat, tmp_path / "out")

    def test_bad_trial_dropped_with_reason(self, tmp_path):
        mat = write_mat_archive(tmp_path / "p1.mat", ["a", "", "b"], [1, 1, 1])
        _out, report = convert_mitchell(mat, tmp_path / "out")
        assert report.records_dropped == {"missing-word": 1}
        assert report.records_written == 2
        report.check_balance()


@pytest.mark.skipif(
    not os.environ.get("KBCONVERT_MITCHELL_MAT"),
    reason="set KBCONVERT_MITCHELL_MAT to a real 60-noun participant archive",
)
def test_real_archive_has_60_words_6_presentations(tmp_path):
    mat = os.environ["KBCONVERT_MITCHELL_MAT"]
    out_path, report = convert_mitchell(mat, tmp_path / "out")
    _fields, word_lines, _payload = parse_canonical(out_path)
    assert len(word_lines) == 60
    assert all(reps == "6" for _w, reps in word_lines)
    assert report.records_written == 360

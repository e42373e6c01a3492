"""60-noun fMRI .mat archive -> canonical per-participant activation file.

The archive (one file per participant) holds a ``data`` cell array of
per-trial voxel vectors, an ``info`` struct array labeling each trial
with its stimulus word and repetition epoch, and a ``meta`` struct with
voxel counts and grid dimensions. The converter regroups trials by word,
orders presentations by epoch, and writes them into the binary format
the evaluation toolkit reads: a magic line, a small text header, and
little-endian 32-bit floats, word-major.

One record is one (word, presentation) trial.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.io

from kbconvert.report import ConversionReport, normalize_word

_MAGIC = b"KBFMRI1\n"
DEFAULT_GRID_SIZE = "3x3x6 mm"


def _require_field(struct, name: str, context: str):
    value = getattr(struct, name, None)
    if value is None:
        raise ValueError(f"{context}: missing field {name!r}")
    return value


def _write_canonical(
    path: Path,
    participant: str,
    words: list[str],
    presentations: list[np.ndarray],
    voxel_count: int,
    grid_dims: tuple[int, int, int] | None,
    grid_size: str,
) -> None:
    dims = "x".join(str(v) for v in grid_dims) if grid_dims else "unknown"
    header = [
        f"participant\t{participant}",
        f"voxel_count\t{voxel_count}",
        f"grid\t{dims}\t{grid_size}",
        f"words\t{len(words)}",
    ]
    header += [f"{w}\t{p.shape[0]}" for w, p in zip(words, presentations)]
    header.append("end")
    with path.open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(("\n".join(header) + "\n").encode("utf-8"))
        for pres in presentations:
            fh.write(np.ascontiguousarray(pres, dtype="<f4").tobytes())


def convert_mitchell(
    mat_path: str | Path,
    output_dir: str | Path,
    grid_size: str = DEFAULT_GRID_SIZE,
) -> tuple[Path, ConversionReport]:
    """Convert one participant archive; returns (output path, report)."""
    mat_path = Path(mat_path)
    output_dir = Path(output_dir)
    report = ConversionReport(source=str(mat_path))

    try:
        archive = scipy.io.loadmat(mat_path, squeeze_me=True, struct_as_record=False)
    except Exception as exc:
        raise ValueError(f"{mat_path}: unreadable archive ({exc})")
    for key in ("data", "info", "meta"):
        if key not in archive:
            raise ValueError(f"{mat_path}: missing field {key!r}")
    data = archive["data"]
    info = np.atleast_1d(archive["info"])
    meta = archive["meta"]

    voxel_count = int(_require_field(meta, "nvoxels", str(mat_path)))
    participant = str(getattr(meta, "subject", mat_path.stem))
    grid_dims = None
    if all(hasattr(meta, d) for d in ("dimx", "dimy", "dimz")):
        grid_dims = (int(meta.dimx), int(meta.dimy), int(meta.dimz))

    trials = np.atleast_1d(data)
    if len(trials) != len(info):
        raise ValueError(
            f"{mat_path}: {len(trials)} data trials but {len(info)} info entries"
        )
    if len(trials) == 0:
        raise ValueError(f"{mat_path}: archive holds no trials")

    # regroup trials by stimulus word, presentations ordered by epoch
    by_word: dict[str, list[tuple[int, int, np.ndarray]]] = {}
    for index, (trial, entry) in enumerate(zip(trials, info)):
        report.records_read += 1
        word = getattr(entry, "word", None)
        epoch = getattr(entry, "epoch", None)
        if isinstance(word, np.ndarray):
            # loadmat renders empty MATLAB strings as empty arrays
            word = None if word.size == 0 else str(word)
        if word is None or str(word).strip() == "":
            report.drop("missing-word")
            continue
        if epoch is None:
            report.drop("missing-epoch")
            continue
        vector = np.asarray(trial, dtype=np.float64).ravel()
        if vector.size != voxel_count:
            report.drop("voxel-count-mismatch")
            continue
        by_word.setdefault(normalize_word(str(word)), []).append(
            (int(epoch), index, vector)
        )
    if not by_word:
        raise ValueError(f"{mat_path}: no usable trials")

    words = list(by_word)  # first-occurrence order over trials
    presentations = []
    for word in words:
        rows = sorted(by_word[word], key=lambda t: (t[0], t[1]))
        presentations.append(np.stack([v for _e, _i, v in rows]))
        report.records_written += len(rows)

    output_dir.mkdir(parents=True, exist_ok=True)
    out_path = output_dir / f"{participant}.fmri"
    _write_canonical(
        out_path, participant, words, presentations, voxel_count, grid_dims, grid_size
    )
    report.add_output(out_path)
    report.check_balance()
    return out_path, report

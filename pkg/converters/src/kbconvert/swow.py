"""Raw word-association response export -> canonical strength TSV.

The raw file is a CSV where each participant row carries a cue and its
three response slots (R1, R2, R3). The converter counts identical
(cue, response, slot) tokens and writes the aggregated table sorted by
cue, slot, response, so output bytes are reproducible. One record is one
response slot of one row; unusable slots are dropped with a reason code.
"""

from __future__ import annotations

import csv
from pathlib import Path

from kbconvert.report import ConversionReport, normalize_word

SLOTS = ("R1", "R2", "R3")

# markers the crowdsourcing pipeline uses for absent responses
_MISSING_MARKERS = {
    "": "empty-response",
    "na": "na-response",
    "no more responses": "no-more-responses",
    "unknown word": "unknown-word",
}


def convert_swow_raw(
    raw_csv: str | Path, output: str | Path
) -> ConversionReport:
    """Aggregate a raw response CSV into a strength TSV.

    Returns the conversion report; caller decides where to save it.
    """
    raw_csv = Path(raw_csv)
    report = ConversionReport(source=str(raw_csv))
    counts: dict[tuple[str, str, str], int] = {}

    with raw_csv.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{raw_csv}: empty input")
        columns = {name.strip().lower(): i for i, name in enumerate(header)}
        missing_cols = [c for c in ("cue", "r1", "r2", "r3") if c not in columns]
        if missing_cols:
            raise ValueError(f"{raw_csv}: header lacks columns {missing_cols}")
        cue_col = columns["cue"]
        slot_cols = [(slot, columns[slot.lower()]) for slot in SLOTS]
        needed = 1 + max(cue_col, *(c for _s, c in slot_cols))

        n_rows = 0
        for row in reader:
            if not row:
                continue
            n_rows += 1
            report.records_read += len(SLOTS)
            if len(row) < needed:
                report.drop("malformed-row", len(SLOTS))
                continue
            cue = normalize_word(row[cue_col])
            if not cue:
                report.drop("empty-cue", len(SLOTS))
                continue
            for slot, col in slot_cols:
                response = normalize_word(row[col])
                reason = _MISSING_MARKERS.get(response)
                if reason is not None:
                    report.drop(reason)
                    continue
                counts[(cue, response, slot)] = counts.get((cue, response, slot), 0) + 1
                report.records_written += 1
    if n_rows == 0:
        raise ValueError(f"{raw_csv}: empty input")

    output = Path(output)
    with output.open("w", encoding="utf-8") as fh:
        fh.write("cue\tresponse\tslot\tcount\n")
        for (cue, response, slot) in sorted(counts, key=lambda k: (k[0], k[2], k[1])):
            fh.write(f"{cue}\t{response}\t{slot}\t{counts[(cue, response, slot)]}\n")
    report.add_output(output)
    report.check_balance()
    return report

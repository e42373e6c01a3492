"""WordNet 3.0 database files -> synset edges, memberships, word edges.

Parses the distribution's ``data.{noun,verb,adj,adv}`` files directly:
each line is one synset with its lemma list and relation pointers.
Semantic pointers (source/target field 0000) become synset-to-synset
edges with human-readable relation labels; purely lexical pointers are
dropped with a reason code. The word-level edge list expands every
synset edge into the cross product of the two synsets' lemmas.

One record is one relation pointer.
"""

from __future__ import annotations

from pathlib import Path

from kbconvert.report import ConversionReport, normalize_word

DATA_FILES = ("data.noun", "data.verb", "data.adj", "data.adv")

POINTER_LABELS = {
    "!": "antonym",
    "@": "hypernym",
    "@i": "instance_hypernym",
    "~": "hyponym",
    "~i": "instance_hyponym",
    "#m": "member_holonym",
    "#s": "substance_holonym",
    "#p": "part_holonym",
    "%m": "member_meronym",
    "%s": "substance_meronym",
    "%p": "part_meronym",
    "=": "attribute",
    "+": "derivationally_related",
    ";c": "domain_topic",
    "-c": "member_domain_topic",
    ";r": "domain_region",
    "-r": "member_domain_region",
    ";u": "domain_usage",
    "-u": "member_domain_usage",
    "*": "entailment",
    ">": "cause",
    "^": "also_see",
    "$": "verb_group",
    "&": "similar_to",
    "<": "participle",
    "\\": "pertainym",
}

_LEMMA_MARKERS = ("(p)", "(a)", "(ip)")


def _clean_lemma(raw: str) -> str:
    for marker in _LEMMA_MARKERS:
        if raw.endswith(marker):
            raw = raw[: -len(marker)]
            break
    return normalize_word(raw.replace("_", " "))


def _synset_id(offset: str, pos: str) -> str:
    # adjective satellites live in data.adj; pointers address them as 'a'
    pos = "a" if pos == "s" else pos
    return f"{int(offset):08d}-{pos}"


def _parse_data_line(line: str, context: str):
    """Return (synset_id, [lemmas], [(symbol, target_id, source_target)])."""
    body = line.split("|", 1)[0].rstrip()
    fields = body.split(" ")
    if len(fields) < 4:
        raise ValueError(f"{context}: truncated synset line")
    offset, _lex_filenum, ss_type = fields[0], fields[1], fields[2]
    w_cnt = int(fields[3], 16)
    pos = 4
    lemmas = []
    for _ in range(w_cnt):
        lemmas.append(_clean_lemma(fields[pos]))
        pos += 2  # skip lex_id
    p_cnt = int(fields[pos])
    pos += 1
    pointers = []
    for _ in range(p_cnt):
        symbol, target_offset, target_pos, source_target = fields[pos: pos + 4]
        pointers.append((symbol, _synset_id(target_offset, target_pos), source_target))
        pos += 4
    return _synset_id(offset, ss_type), lemmas, pointers


def extract_wordnet(
    wn_dir: str | Path, output_dir: str | Path
) -> tuple[dict[str, Path], ConversionReport]:
    """Extract relations from a WordNet distribution directory.

    Writes ``synset_edges.tsv``, ``synset_members.tsv``, and
    ``word_edges.tsv`` under ``output_dir``. Returns the paths and the
    conversion report over relation pointers.
    """
    wn_dir = Path(wn_dir)
    output_dir = Path(output_dir)
    present = [wn_dir / name for name in DATA_FILES if (wn_dir / name).exists()]
    if not present:
        raise ValueError(f"{wn_dir}: no data.* files found; not a WordNet database")
    report = ConversionReport(source=str(wn_dir))

    members: dict[str, list[str]] = {}
    edges: set[tuple[str, str, str]] = set()
    for data_file in present:
        with data_file.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip() or line.startswith(" "):
                    continue  # license header
                synset, lemmas, pointers = _parse_data_line(
                    line, f"{data_file}, line {lineno}"
                )
                members.setdefault(synset, [])
                for lemma in lemmas:
                    if lemma not in members[synset]:
                        members[synset].append(lemma)
                for symbol, target, source_target in pointers:
                    report.records_read += 1
                    if source_target != "0000":
                        report.drop("lexical-pointer")
                        continue
                    label = POINTER_LABELS.get(symbol)
                    if label is None:
                        report.drop("unknown-pointer-symbol")
                        continue
                    edge = (synset, label, target)
                    if edge in edges:
                        report.drop("duplicate-edge")
                        continue
                    edges.add(edge)
                    report.records_written += 1

    output_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "synset_edges": output_dir / "synset_edges.tsv",
        "synset_members": output_dir / "synset_members.tsv",
        "word_edges": output_dir / "word_edges.tsv",
    }
    with paths["synset_edges"].open("w", encoding="utf-8") as fh:
        for lhs, rel, rhs in sorted(edges):
            fh.write(f"{lhs}\t{rel}\t{rhs}\n")
    with paths["synset_members"].open("w", encoding="utf-8") as fh:
        for synset in sorted(members):
            for word in members[synset]:
                fh.write(f"{synset}\t{word}\n")

    word_edges: set[tuple[str, str, str]] = set()
    for lhs, rel, rhs in edges:
        for w_lhs in members.get(lhs, ()):
            for w_rhs in members.get(rhs, ()):
                word_edges.add((w_lhs, rel, w_rhs))
    with paths["word_edges"].open("w", encoding="utf-8") as fh:
        for lhs, rel, rhs in sorted(word_edges):
            fh.write(f"{lhs}\t{rel}\t{rhs}\n")

    for path in paths.values():
        report.add_output(path)
    report.check_balance()
    return paths, report

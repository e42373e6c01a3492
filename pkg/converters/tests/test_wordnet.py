import pytest

from kbconvert.wordnet import extract_wordnet


class TestExtractWordnet:
    def test_outputs_and_expansion(self, mini_wordnet, tmp_path):
        paths, report = extract_wordnet(mini_wordnet, tmp_path / "out")
        edges = paths["synset_edges"].read_text().splitlines()
        assert "00001740-n\thypernym\t00002137-n" in edges
        assert "00002137-n\thyponym\t00001740-n" in edges

        members = paths["synset_members"].read_text().splitlines()
        assert "00002137-n\tcanine" in members
        assert "00002137-n\tcur" in members
        assert "00003257-n\tice cream" in members  # underscore becomes space

        word_edges = set(paths["word_edges"].read_text().splitlines())
        # known fact spot check: the dog -> canine hypernym link survives
        assert "dog\thypernym\tcanine" in word_edges
        assert "dog\thypernym\tcur" in word_edges
        assert "canine\thyponym\tdog" in word_edges
        assert "cur\thyponym\tdog" in word_edges
        report.check_balance()

    def test_lexical_pointer_dropped(self, mini_wordnet, tmp_path):
        _paths, report = extract_wordnet(mini_wordnet, tmp_path / "out")
        assert report.records_dropped.get("lexical-pointer") == 1
        assert report.records_read == 4
        assert report.records_written == 3

    def test_deterministic(self, mini_wordnet, tmp_path):
        paths1, _ = extract_wordnet(mini_wordnet, tmp_path / "one")
        paths2, _ = extract_wordnet(mini_wordnet, tmp_path / "two")
        for key in paths1:
            assert paths1[key].read_bytes() == paths2[key].read_bytes()

    def test_missing_database_errors(self, tmp_path):
        empty = tmp_path / "nothing"
        empty.mkdir()
        with pytest.raises(ValueError, match="data"):
            extract_wordnet(empty, tmp_path / "out")

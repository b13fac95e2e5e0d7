import pytest
from hypothesis import given, strategies as st

from faqmatch.textnorm import DEFAULT_ABBREVIATIONS, Sentence, load_abbreviations, split_sentences, tokenize


class TestTokenize:
    def test_basic_question(self):
        assert tokenize("What causes Fabry disease?") == ["what", "causes", "fabry", "disease"]

    def test_empty(self):
        assert tokenize("") == []

    def test_hyphen_is_boundary(self):
        # hand-applied rules: punctuation splits, digits survive, lowercase
        assert tokenize("COVID-19 risk") == ["covid", "19", "risk"]

    def test_underscore_is_boundary(self):
        assert tokenize("foo_bar") == ["foo", "bar"]

    def test_punctuation_dropped(self):
        assert tokenize("a, b; c! (d)") == ["a", "b", "c", "d"]

    def test_whitespace_only(self):
        assert tokenize(" \t\n ") == []

    @given(st.text(max_size=80))
    def test_idempotent_on_joined_output(self, text):
        tokens = tokenize(text)
        assert tokenize(" ".join(tokens)) == tokens

    @given(st.text(max_size=80))
    def test_deterministic_and_valid(self, text):
        a = tokenize(text)
        assert a == tokenize(text)
        for token in a:
            assert token
            assert not any(c.isspace() for c in token)


class TestSplitSentences:
    def test_two_sentences(self):
        sents = split_sentences("It is rare. See a doctor.")
        assert [s.text for s in sents] == ["It is rare.", "See a doctor."]

    def test_abbreviation_guard(self):
        assert len(split_sentences("Ask Dr. Smith today.")) == 1

    def test_mixed_terminals(self):
        sents = split_sentences("What is GERD? It is reflux! Yes.")
        assert [s.text for s in sents] == ["What is GERD?", "It is reflux!", "Yes."]

    def test_dotted_abbreviation(self):
        assert len(split_sentences("Use ointments, e.g. Vaseline today.")) == 1

    def test_lowercase_after_period_does_not_split(self):
        assert len(split_sentences("It helps. but slowly.")) == 1

    def test_decimal_number_does_not_split(self):
        assert len(split_sentences("Take 2.5 Mg daily.")) == 1

    def test_no_terminal(self):
        sents = split_sentences("just a fragment")
        assert [s.text for s in sents] == ["just a fragment"]

    def test_empty_and_whitespace(self):
        assert split_sentences("") == []
        assert split_sentences("  \n ") == []

    def test_terminal_run(self):
        sents = split_sentences("Really?! Yes.")
        assert [s.text for s in sents] == ["Really?!", "Yes."]

    def test_custom_abbreviations(self):
        text = "See sec. Two for more."
        assert len(split_sentences(text)) == 2
        assert len(split_sentences(text, abbreviations={"sec"})) == 1

    def test_tokens_match_text(self):
        for sentence in split_sentences("First one. Second one! Third?"):
            assert sentence.tokens == tokenize(sentence.text)

    @given(st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=0x2FF), max_size=120))
    def test_concatenation_preserves_tokens(self, text):
        sents = split_sentences(text)
        joined = " ".join(s.text for s in sents)
        assert tokenize(joined) == tokenize(text)

    @given(st.text(max_size=120))
    def test_deterministic(self, text):
        first = [(s.text, s.tokens) for s in split_sentences(text)]
        second = [(s.text, s.tokens) for s in split_sentences(text)]
        assert first == second


def test_default_abbreviations_loaded():
    assert "dr" in DEFAULT_ABBREVIATIONS
    assert "e.g" in DEFAULT_ABBREVIATIONS


def test_load_abbreviations(tmp_path):
    path = tmp_path / "abbr.txt"
    path.write_text("foo\nBar.\n\n# comment\n", encoding="utf-8")
    assert load_abbreviations(str(path)) == frozenset({"foo", "bar"})


def test_sentence_from_text():
    s = Sentence.from_text("What is GERD?")
    assert s.tokens == ["what", "is", "gerd"]

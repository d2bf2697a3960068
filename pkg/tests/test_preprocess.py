import logging

import pytest
from hypothesis import given, settings, strategies as st

from bugloc.preprocess import (BUG_REPORT, SOURCE_FILE, PreprocessConfig,
                               TokenStream, preprocess, split_identifier,
                               stem, strip_code_noise)

CONFIG = PreprocessConfig()


class TestStripCodeNoise:
    def test_line_comment(self):
        assert strip_code_noise("int x; // counter") == "int x;"

    def test_block_comment(self):
        assert strip_code_noise("/* a */ y = 1;") == " y = 1;"

    def test_string_literal_dropped(self):
        assert strip_code_noise('s = "hello world";') == "s = ;"

    def test_char_literal_dropped(self):
        assert strip_code_noise("c = 'x';") == "c = ;"

    def test_escaped_quote_inside_literal(self):
        assert strip_code_noise(r's = "a \" b"; int y;') == "s = ; int y;"

    def test_comment_marker_inside_literal(self):
        assert strip_code_noise('u = "http://x"; int k;') == "u = ; int k;"

    def test_unterminated_block_comment_strips_to_eof(self, caplog):
        with caplog.at_level(logging.WARNING):
            assert strip_code_noise("int a; /* oops") == "int a;"
        assert any("unterminated" in r.message for r in caplog.records)

    def test_multiline(self):
        src = "int a; // one\n/* two\nthree */ int b;\n"
        assert strip_code_noise(src) == "int a;\n int b;\n"


class TestSplitIdentifier:
    def test_camel_case(self):
        assert split_identifier("getUserName") == ["get", "user", "name", "getusername"]

    def test_underscores(self):
        assert split_identifier("MAX_VALUE") == ["max", "value", "maxvalue"]

    def test_single_letter(self):
        assert split_identifier("x") == ["x"]

    def test_acronym_run(self):
        assert split_identifier("XMLParser") == ["xml", "parser", "xmlparser"]

    def test_digits_separate(self):
        assert split_identifier("utf8Decoder") == ["utf", "decoder", "utfdecoder"]

    def test_compound_disabled(self):
        assert split_identifier("getUserName", keep_compound=False) == ["get", "user", "name"]

    def test_pure_digits(self):
        assert split_identifier("404") == []


class TestPipeline:
    def test_bug_report_text(self):
        ts = preprocess("Stop the running job", BUG_REPORT, CONFIG)
        assert ts.tokens == ("stop", "run", "job")
        assert ts.origin == BUG_REPORT

    def test_source_keywords_removed(self):
        ts = preprocess("public void printLine()", SOURCE_FILE, CONFIG)
        assert ts.tokens == ("print", "line", "printlin")

    def test_empty_text(self):
        ts = preprocess("", BUG_REPORT, CONFIG)
        assert ts.empty
        assert len(ts) == 0

    def test_comment_text_not_indexed(self):
        ts = preprocess("int counter; // seekrit flamingo", SOURCE_FILE, CONFIG)
        assert "flamingo" not in ts.tokens
        assert "counter" in ts.tokens

    def test_stem_collapsing_onto_keyword_is_filtered(self):
        # "classes" stems to the reserved word "class"
        ts = preprocess("classes of widgets", BUG_REPORT, CONFIG)
        assert "class" not in ts.tokens
        assert "widget" in ts.tokens

    def test_unknown_origin_rejected(self):
        with pytest.raises(ValueError):
            preprocess("text", "email", CONFIG)

    def test_short_tokens_dropped(self):
        ts = preprocess("x y go stop", BUG_REPORT, CONFIG)
        assert ts.tokens == ("go", "stop")


# realistic-looking text: identifiers, prose words, punctuation, literals
_words = st.sampled_from([
    "runner", "connected", "parseLine", "MAX_VALUE", "the", "agree",
    "NullPointerException", "causes", "utf8", "x", "widgetFactory",
    "classes", "dying", "analyser", "this.field", "a_b_c", "pony;",
])
_texts = st.lists(_words, min_size=0, max_size=30).map(" ".join)


@settings(max_examples=200, deadline=None)
@given(_texts)
def test_idempotent_over_own_output(text):
    once = preprocess(text, BUG_REPORT, CONFIG)
    again = preprocess(" ".join(once.tokens), BUG_REPORT, CONFIG)
    assert sorted(once.tokens) == sorted(again.tokens)


@settings(max_examples=200, deadline=None)
@given(_texts)
def test_no_stopwords_or_keywords_in_output(text):
    ts = preprocess(text, SOURCE_FILE, CONFIG)
    banned = CONFIG.stopwords | CONFIG.keywords
    assert not set(ts.tokens) & banned
    assert all(t == t.lower() and len(t) >= CONFIG.min_token_length for t in ts.tokens)


def test_deterministic():
    text = "Stop the running RunningJob jobs // with noise"
    a = preprocess(text, SOURCE_FILE, CONFIG)
    b = preprocess(text, SOURCE_FILE, CONFIG)
    assert a.tokens == b.tokens


def test_config_from_files(tmp_path):
    stop = tmp_path / "stop.txt"
    stop.write_text("# comment\nfoo\nBAR\n")
    keys = tmp_path / "keys.txt"
    keys.write_text("zork\n")
    config = PreprocessConfig.load(stopwords_path=stop, keywords_path=keys)
    assert config.stopwords == frozenset({"foo", "bar"})
    assert config.keywords == frozenset({"zork"})
    ts = preprocess("foo bar zork quux", BUG_REPORT, config)
    assert ts.tokens == ("quux",)


def test_empty_wordlists_rejected():
    with pytest.raises(ValueError):
        PreprocessConfig(stopwords=frozenset(), keywords=frozenset({"if"}))


def test_token_stream_is_immutable():
    ts = TokenStream(("a",), BUG_REPORT)
    with pytest.raises(AttributeError):
        ts.tokens = ()


def test_stem_is_single_pass_porter():
    # the op itself is one Porter application; only the pipeline iterates
    assert stem("agreed") == "agre"

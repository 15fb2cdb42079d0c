"""Shared pytest fixtures for cuesync tests."""

import tempfile
from pathlib import Path

import pytest

from cuesync.annot_io import Hearing, PhoneInterval, SentenceTimeline
from cuesync.measures import assemble_table
from cuesync.synth import SynthOptions, gen_corpus, reference_profiles


def make_timeline(
    lip: list[tuple[float, float, str]],
    hand: list[tuple[float, float]],
    sentence_id: str = "s001",
    cuer_id: str = "NF1",
    hearing: Hearing = Hearing.NORMAL,
    sentence_end: float | None = None,
) -> SentenceTimeline:
    """Build a timeline from (start, end, label) lip triples and (start, end) hand pairs."""
    lip_vowels = [PhoneInterval(s, e, label) for s, e, label in lip]
    hand_vowels = [PhoneInterval(s, e, label) for (s, e), (_, _, label) in zip(hand, lip)]
    return SentenceTimeline(
        sentence_id=sentence_id,
        cuer_id=cuer_id,
        hearing=hearing,
        lip_vowels=lip_vowels,
        hand_vowels=hand_vowels,
        sentence_end=sentence_end if sentence_end is not None else lip[-1][1],
    )


@pytest.fixture
def temp_dir():
    """Provide a temporary directory that's cleaned up after the test."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def sample_timeline():
    """Three vowels; the hand leads each lip vowel by 300-350 ms."""
    return make_timeline(
        lip=[(0.5, 0.7, "a"), (0.9, 1.1, "i"), (1.3, 1.6, "u")],
        hand=[(0.2, 0.4), (0.6, 0.8), (1.0, 1.2)],
    )


@pytest.fixture
def sample_textgrid():
    """Long-format TextGrid with silences around two vowels and a consonant."""
    return """File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 2.0
tiers? <exists>
size = 1
item []:
    item [1]:
        class = "IntervalTier"
        name = "phones"
        xmin = 0
        xmax = 2.0
        intervals: size = 5
        intervals [1]:
            xmin = 0
            xmax = 0.5
            text = ""
        intervals [2]:
            xmin = 0.5
            xmax = 0.7
            text = "a"
        intervals [3]:
            xmin = 0.7
            xmax = 0.9
            text = "sh"
        intervals [4]:
            xmin = 0.9
            xmax = 1.1
            text = "i"
        intervals [5]:
            xmin = 1.1
            xmax = 2.0
            text = " "
"""


@pytest.fixture
def sample_eaf():
    """EAF document with one hand tier of two annotations (times in ms)."""
    return """<?xml version="1.0" encoding="UTF-8"?>
<ANNOTATION_DOCUMENT AUTHOR="test" FORMAT="3.0" VERSION="3.0">
  <HEADER MEDIA_FILE="" TIME_UNITS="milliseconds"/>
  <TIME_ORDER>
    <TIME_SLOT TIME_SLOT_ID="ts1" TIME_VALUE="200"/>
    <TIME_SLOT TIME_SLOT_ID="ts2" TIME_VALUE="400"/>
    <TIME_SLOT TIME_SLOT_ID="ts3" TIME_VALUE="600"/>
    <TIME_SLOT TIME_SLOT_ID="ts4" TIME_VALUE="800"/>
  </TIME_ORDER>
  <TIER LINGUISTIC_TYPE_REF="default-lt" TIER_ID="hand">
    <ANNOTATION>
      <ALIGNABLE_ANNOTATION ANNOTATION_ID="a2" TIME_SLOT_REF1="ts3" TIME_SLOT_REF2="ts4">
        <ANNOTATION_VALUE>i</ANNOTATION_VALUE>
      </ALIGNABLE_ANNOTATION>
    </ANNOTATION>
    <ANNOTATION>
      <ALIGNABLE_ANNOTATION ANNOTATION_ID="a1" TIME_SLOT_REF1="ts1" TIME_SLOT_REF2="ts2">
        <ANNOTATION_VALUE>a</ANNOTATION_VALUE>
      </ALIGNABLE_ANNOTATION>
    </ANNOTATION>
  </TIER>
  <LINGUISTIC_TYPE LINGUISTIC_TYPE_ID="default-lt" TIME_ALIGNABLE="true"/>
</ANNOTATION_DOCUMENT>
"""


@pytest.fixture(scope="session")
def small_corpus():
    """A small seeded corpus of the five reference cuers (exact times, no anchor hold)."""
    options = SynthOptions(quantum=None, dwell=0.0)
    return gen_corpus(reference_profiles(), n_sentences=20, seed=11, options=options)


@pytest.fixture(scope="session")
def small_table(small_corpus):
    """Measure table of small_corpus."""
    return assemble_table(small_corpus.timelines)

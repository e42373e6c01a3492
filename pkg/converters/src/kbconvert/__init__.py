"""kbconvert: batch converters from research-native dataset formats to the
canonical TSV/binary formats of the kbembed toolkit.

Each converter is deterministic (same input, byte-identical output) and
emits a conversion report whose record arithmetic balances exactly:
records read = records written + records dropped.
"""

from kbconvert.report import ConversionReport
from kbconvert.swow import convert_swow_raw
from kbconvert.mitchell import convert_mitchell
from kbconvert.wordnet import extract_wordnet

__version__ = "0.1.0"

"""Lexical detector for algorithmically generated domain names.

The pipeline: normalize raw domains to SLDs, derive string variants and a
40-slot feature vector per SLD, train a bagged decision-tree ensemble, and
evaluate with repeated stratified cross-validation at controlled class
ratios.  Synthetic generators for the common AGD archetypes are included so
the whole loop runs offline.
"""

__version__ = "0.1.0"

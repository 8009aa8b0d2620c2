# What the detector actually sees: the 40-float vector behind one domain.
#
# Three contrasting SLDs go through the same pipeline, and the features
# that drive the separation are printed side by side.

from dga_sentinel.defaults import default_models
from dga_sentinel.features import FeatureExtractor
from dga_sentinel.normalize import parse_domain
from dga_sentinel.textmodels import heuristic_gibberish_score, markov_score, segment

models = default_models()
extractor = FeatureExtractor(models)

# Normalization first: the detector scores the second-level label only,
# so "WWW.PayPal-Login.co.uk" and "paypal-login.co.uk" are the same SLD.
record = parse_domain("WWW.PayPal-Login.co.uk")
print(f"parse_domain: sld={record.sld!r} labels={record.label_count} "
      f"dots={record.dot_count} idn={record.is_idn}")

english = "sunshinebakery"   # two dictionary words glued together
hexish = "4f3a9c01d2e8"      # hash-like
noise = "xkqvproztwme"       # keyboard mash

vectors = {s: extractor.extract_sld(s) for s in (english, hexish, noise)}

# A few rows tell most of the story.  R-Dom-3G is the share of the SLD's
# trigrams ever seen in benign training data; GIB-1-Dom is the character
# transition plausibility; E-Dom is plain Shannon entropy.
show = ("L-LEN", "L-DIG", "L-CON-MAX", "R-Dom-3G", "R-W2-LEN",
        "GIB-1-Dom", "GIB-2-Dom", "E-Dom")
print(f"{'feature':<12}" + "".join(f"{s:>16}" for s in vectors))
for name in show:
    row = "".join(f"{vectors[s].value(name):>16.4f}" for s in vectors)
    print(f"{name:<12}{row}")

# The word-aware features come from a minimum-cost segmentation against a
# frequency-ranked vocabulary.  Real words come back whole; noise shatters
# into expensive single letters.
for s in (english, noise):
    print(f"segment({s!r}) -> {segment(s, models.word)}")

# The two gibberish scorers disagree on purpose: one is a trained character
# chain (higher = more plausible), the other a calibration-band heuristic
# (higher = more gibberish).  The forest gets both and learns the mapping.
for s in (english, hexish, noise):
    print(f"{s:<16} markov={markov_score(s, models.markov):.4f}  "
          f"heuristic={heuristic_gibberish_score(s, models.word):.4f}")

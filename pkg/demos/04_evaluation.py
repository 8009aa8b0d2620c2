# The evaluation harness end to end, shrunk to demo size.
#
# Repeated sampling + stratified cross-validation, one line per family,
# then the same experiment under class imbalance.  Full-size runs live in
# tests/test_acceptance.py; this uses 3 repetitions x 5 folds to finish
# fast.

from dga_sentinel.defaults import default_benign_corpus, default_models, default_wordlist
from dga_sentinel.evaluate import EvalConfig, evaluate_binary, repeat_experiment, report_text
from dga_sentinel.forest import ForestParams
from dga_sentinel.synth import DgaSpec, generate

models = default_models()
benign = list(default_benign_corpus().slds)

words = tuple(w for w in default_wordlist()[200:] if 4 <= len(w) <= 8)[:500]
families = [
    ("hex8", generate(DgaSpec(archetype="hex", seed=101, count=600, length=8))),
    ("dict2", generate(DgaSpec(archetype="wordlist", seed=202, count=600, wordlist=words))),
]

config = EvalConfig(
    repetitions=3,
    folds=5,
    rng_seed=7,
    max_class_size=600,
    forest_params=ForestParams(n_trees=40),
)

# Each family is measured independently against the shared benign pool;
# every repetition redraws the sample and re-derives fold and forest seeds.
report = evaluate_binary(benign, families, models, config)
print(report_text(report))

# Detection should not collapse when malicious domains are rare.  Rerun one
# family at 1:1 and 1:10 and compare the means.
for ratio in ((1, 1), (1, 10)):
    cfg = EvalConfig(
        ratio=ratio,
        repetitions=3,
        folds=5,
        rng_seed=7,
        max_class_size=600,
        forest_params=ForestParams(n_trees=40),
    )
    result = repeat_experiment(benign, families[0][1], models, cfg, family="hex8")
    print(f"hex8 at {ratio[0]}:{ratio[1]} malicious:benign -> "
          f"F1={result.metrics.f1:.4f} (sigma {result.sigma_f1:.4f}, "
          f"support {result.support})")

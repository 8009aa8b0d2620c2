# A tour of the synthetic domain generators.
#
# Each archetype mimics a different malware naming strategy.  Everything is
# seeded, so the output of this script never changes between runs.

from dga_sentinel.synth import DgaSpec, emit_domains, generate, label_dataset

# Hex names: fixed length, hexadecimal alphabet.  The classic look of
# hash-derived names.
hex_spec = DgaSpec(archetype="hex", seed=1, count=5, length=8)
print("hex, length 8:")
for sld in generate(hex_spec):
    print("   ", sld)

# Random-character names draw uniformly from a configurable charset and a
# length range, so adjacent samples differ in length too.
rand_spec = DgaSpec(
    archetype="random_char", seed=2, count=5, length=(10, 14),
    charset="abcdefghijklmnopqrstuvwxyz",
)
print("random_char, length 10-14:")
for sld in generate(rand_spec):
    print("   ", sld)

# Wordlist names concatenate dictionary words.  These are the hard ones:
# letter statistics look like English because they are English.
words = ("cloud", "data", "fast", "green", "light", "net", "safe", "zone")
dict_spec = DgaSpec(
    archetype="wordlist", seed=3, count=5, wordlist=words, words_per_domain=2,
)
print("wordlist, 2 words each:")
for sld in generate(dict_spec):
    print("   ", sld)

# emit_domains appends a TLD when full domains are needed downstream.
print("as .com domains:", emit_domains(generate(dict_spec), tld="com")[:2])

# label_dataset builds a supervised dataset from a benign pool plus any
# number of (family, slds) groups.  A synthetic SLD that collides with a
# benign one is dropped from the malicious side: the benign reading wins,
# and the collision is counted.
benign_pool = ["google", "wikipedia", "safezone", "weather"]
dataset = label_dataset(
    benign_pool,
    [("dict2", generate(dict_spec)), ("hex8", generate(hex_spec))],
)
print(f"dataset: {len(dataset.records)} records, "
      f"{dataset.overlap_dropped} benign collisions dropped")
for record in dataset.records[3:7]:
    print(f"    {record.sld:<14} label={record.label:<10} family={record.family}")

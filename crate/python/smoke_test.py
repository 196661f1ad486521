"""Quick end-to-end check of the Python bindings.

Build and install the extension first:

    maturin build --release -m crates/py/Cargo.toml -o target/wheels
    pip install --force-reinstall target/wheels/infothresh-*.whl
"""

import json
import math

import infothresh

model = dict(m=32, n=600, p0=0.5, edge_flip=0.05, gm_flip=0.05, epsilon=0.2, steps=3)

mi = infothresh.measures(p0=0.5, edge_flip=0.0, gm_flip=0.0)
assert mi["mutual_info"] == 1.0 and mi["i_max"] == 1.0, mi

probs = infothresh.prior("zipf:1.0", 8)
assert math.isclose(sum(probs), 1.0) and probs[0] > probs[-1]

assert infothresh.asymptotic_params(1 << 16) == (0.25, 8)

pair = infothresh.BigraphPair.generate(7, **model)
assert (pair.n, pair.m) == (600, 32)
sig = pair.group_signature("scanned", 3)
assert len(sig) == 600
assert sig[9] == pair.edge("scanned", 3, 10)
assert (3 in pair.members("scanned", 10)) == sig[9]

again = infothresh.BigraphPair.from_json(pair.to_json(), **model)
assert again.group_signature("true", 5) == pair.group_signature("true", 5)

t = pair.run_its(victim=11, noise_seed=3)
assert t["success"] and t["identified"] == 11, t
assert t["q_count"] == len(t["queries"])

b = infothresh.bounds(**model)
assert b["lower_converse"] < b["upper_finite"]

s = infothresh.run_experiment(trials=50, **model)
assert s["trials"] == 50 and s["success_rate"] == 1.0
assert s["ci95_lo"] <= s["mean_q"] <= s["ci95_hi"]

sweep = infothresh.run_sweep("zipf", [0.0, 1.0], trials=50, common_random_numbers=True, **model)
assert [x["prior"] for x in sweep] == ["zipf:0", "zipf:1"]

try:
    infothresh.run_experiment(p0=2.0)
except ValueError as e:
    assert "p0" in str(e)
else:
    raise AssertionError("invalid p0 accepted")

print(json.dumps({"mean_q": s["mean_q"], "bounds": [b["lower_converse"], b["upper_finite"]]}))
print("smoke test passed")

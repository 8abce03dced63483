"""Hinge-loss SVM on a synthetic text corpus, end to end.

Generates a separable corpus, builds bag-of-words counts, trains with the
specialized SPG-M step and with minibatch SGD, and tracks test accuracy,
training hinge loss, and distance to the reference weights.
"""

import numpy as np

import spgm
from spgm.reference import compute_reference, content_hash
from spgm.svm import (
    build_bow_features,
    build_svm_problem,
    make_separable_corpus,
    svm_metrics,
    svm_spgm_step,
)

rng = np.random.default_rng(11)
corpus = make_separable_corpus(n_samples=2000, vocab_size=50, rng=rng)
print("corpus sample:", corpus[0])

dataset = build_bow_features(corpus, vocab_size=50, split_ratio=0.8,
                             rng=np.random.default_rng(12))
print(f"features {dataset.features.shape}, "
      f"train/test {len(dataset.train_indices)}/{len(dataset.test_indices)}")

lam = 0.02
problem = build_svm_problem(dataset, lam)
key = content_hash(dataset.features, dataset.labels, dataset.train_indices,
                   lam=lam)
w_star = compute_reference(problem, tol=1e-8, cache_key=key)
ref_stats = svm_metrics(dataset, w_star)
print(f"reference: accuracy {ref_stats.accuracy:.3f}, "
      f"hinge loss {ref_stats.hinge_loss:.4f}")

print("\n=== specialized SPG-M step (mixed policy) ===")
policy = spgm.StepsizePolicy.mixed(1.0, 30, lam)
w = np.zeros(dataset.n_features)
step_rng = np.random.default_rng(1)
for k in range(40):
    w = svm_spgm_step(dataset, w, policy.step(k), 32, step_rng, lam,
                      accuracy=1e-6)
    if k % 8 == 0 or k == 39:
        stats = svm_metrics(dataset, w, w_ref=w_star)
        print(f"  k={k:3d}: accuracy {stats.accuracy:.3f}  "
              f"loss {stats.hinge_loss:.4f}  error {stats.error:.4f}")

print("\n=== minibatch SGD baseline, same policy ===")
tol = spgm.ToleranceSchedule(mode="capped", cap=1e-4)
traj = spgm.run(problem, np.zeros(dataset.n_features), policy, tol, 32,
                spgm.StopRule(max_iterations=40), method="sgdm", seed=1)
for pt in traj[::8] + ([traj[-1]] if (len(traj) - 1) % 8 else []):
    stats = svm_metrics(dataset, pt.w, w_ref=w_star)
    print(f"  k={pt.k:3d}: accuracy {stats.accuracy:.3f}  "
          f"loss {stats.hinge_loss:.4f}  error {stats.error:.4f}")

/*
 * builtin_scenarios.hpp — shipped scenario specs, stored as JSON text so
 * they exercise exactly the same schema and parser as user-supplied files.
 *
 *   measurement — pointer beable on the apparatus; object description
 *                 decomposes into definite outcomes relative to it
 *   cat-i       — the cat's consciousness as the subject beable, the
 *                 contraption as object
 *   cat-ii      — roles swapped: matter distribution in the contraption as
 *                 subject, the cat as object
 *   wigner      — friend's view (object 1 decoheres relative to the
 *                 friend) and Wigner's view (object 1+2 holds witnessable
 *                 coherence) in one run, under distinct subjects
 *   zurek       — coarse-grained matter distribution over environment
 *                 grains as the subject beable
 */
#pragma once

#include <map>
#include <string>

namespace reldec {

inline const std::map<std::string, std::string>& builtin_scenarios() {
    static const std::map<std::string, std::string> scenarios = {
        {"measurement", R"json({
  "schema": 1,
  "name": "measurement",
  "layout": {"labels": ["1", "2"], "dims": [2, 2]},
  "state": {
    "branches": {
      "weights": [0.36, 0.64],
      "kets": [
        [[1, 0], [0, 0], [0, 0], [0, 0]],
        [[0, 0], [0, 0], [0, 0], [1, 0]]
      ]
    }
  },
  "beables": {
    "pointer": {"subsystem": "2", "projectors": "computational-basis", "values": ["up", "down"]}
  },
  "initial_split": {"object": ["1", "2"], "subject": []},
  "sampling": {"shots": 100000, "seed": 7},
  "steps": [
    {"op": "shift", "discussion": "outcome", "move": ["2"], "direction": "toward-subject"},
    {"op": "convert", "discussion": "outcome", "beable": "pointer"},
    {"op": "measure", "discussion": "outcome", "observable": {"id": "sigma_z"},
     "assert": {"expected_weights": [0.36, 0.64]}}
  ]
})json"},
        {"cat-i", R"json({
  "schema": 1,
  "name": "cat-i",
  "layout": {"labels": ["contraption", "cat"], "dims": [2, 2]},
  "state": {
    "branches": {
      "weights": [0.36, 0.64],
      "kets": [
        [[1, 0], [0, 0], [0, 0], [0, 0]],
        [[0, 0], [0, 0], [0, 0], [1, 0]]
      ]
    }
  },
  "beables": {
    "cat-consciousness": {"subsystem": "cat", "projectors": "computational-basis",
                          "values": ["dead", "live"]}
  },
  "initial_split": {"object": ["contraption"], "subject": ["cat"]},
  "sampling": {"shots": 100000, "seed": 7},
  "steps": [
    {"op": "convert", "discussion": "cat-as-subject", "beable": "cat-consciousness"},
    {"op": "measure", "discussion": "cat-as-subject", "observable": {"id": "sigma_z"},
     "assert": {"expected_weights": [0.36, 0.64]}}
  ]
})json"},
        {"cat-ii", R"json({
  "schema": 1,
  "name": "cat-ii",
  "layout": {"labels": ["contraption", "cat"], "dims": [2, 2]},
  "state": {
    "branches": {
      "weights": [0.36, 0.64],
      "kets": [
        [[1, 0], [0, 0], [0, 0], [0, 0]],
        [[0, 0], [0, 0], [0, 0], [1, 0]]
      ]
    }
  },
  "beables": {
    "ampoule-matter": {"subsystem": "contraption", "projectors": "computational-basis",
                       "values": ["shattered", "intact"]}
  },
  "initial_split": {"object": ["cat"], "subject": ["contraption"]},
  "sampling": {"shots": 100000, "seed": 7},
  "steps": [
    {"op": "convert", "discussion": "matter-as-subject", "beable": "ampoule-matter"},
    {"op": "measure", "discussion": "matter-as-subject", "observable": {"id": "sigma_z"},
     "assert": {"expected_weights": [0.36, 0.64]}}
  ]
})json"},
        {"wigner", R"json({
  "schema": 1,
  "name": "wigner",
  "layout": {"labels": ["1", "2", "3"], "dims": [2, 2, 2]},
  "state": {
    "branches": {
      "weights": [0.36, 0.64],
      "kets": [
        [[1, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0]],
        [[0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [1, 0], [0, 0]]
      ]
    }
  },
  "beables": {
    "friend-sees": {"subsystem": "2", "projectors": "computational-basis",
                    "values": ["saw-up", "saw-down"]},
    "wigner-sees": {"subsystem": "3", "projectors": "computational-basis",
                    "values": ["ready", "done"]}
  },
  "initial_split": {"object": ["1"], "subject": ["2", "3"]},
  "sampling": {"shots": 100000, "seed": 7},
  "steps": [
    {"op": "convert", "discussion": "friend-view", "beable": "friend-sees"},
    {"op": "measure", "discussion": "friend-view", "observable": {"id": "sigma_z"},
     "assert": {"expected_weights": [0.36, 0.64]}},
    {"op": "shift", "discussion": "wigner-view", "move": ["2"], "direction": "toward-object"},
    {"op": "convert", "discussion": "wigner-view", "beable": "wigner-sees"},
    {"op": "witness", "discussion": "wigner-view", "beable": "friend-sees", "p1_subsystem": "1",
     "restarts": 8, "steps": 250, "assert": {"min_gap": 0.2}}
  ]
})json"},
        {"zurek", R"json({
  "schema": 1,
  "name": "zurek",
  "layout": {"labels": ["system", "environment"], "dims": [2, 8]},
  "state": {
    "branches": {
      "weights": [0.5, 0.5],
      "kets": [
        [[1, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0],
         [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0]],
        [[0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0],
         [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [1, 0]]
      ]
    }
  },
  "beables": {
    "matter-distribution": {"subsystem": "environment",
                            "projectors": {"basis_groups": [[0], [7], [1, 2, 3, 4, 5, 6]]},
                            "values": ["all-left", "all-right", "scrambled"]}
  },
  "initial_split": {"object": ["system"], "subject": ["environment"]},
  "sampling": {"shots": 100000, "seed": 7},
  "steps": [
    {"op": "convert", "discussion": "environment-as-subject", "beable": "matter-distribution"},
    {"op": "measure", "discussion": "environment-as-subject", "observable": {"id": "sigma_z"},
     "assert": {"expected_weights": [0.5, 0.5, 0.0]}}
  ]
})json"}};
    return scenarios;
}

}  // namespace reldec

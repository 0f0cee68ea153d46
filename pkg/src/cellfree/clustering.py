"""Joint pilot assignment and user-centric cooperation cluster formation.

Each UE appoints the AP with the strongest average channel as its master.
Masters hand out pilots greedily (least accumulated contamination at the
master, among pilots not already given to the master's earlier appointees).
Every AP then serves, per pilot, the strongest UE on that pilot, except
that a master always serves the UEs it appointed.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class DccAssignment:
    """Pilot indices and the dual serving/served index sets."""

    pilot_of: np.ndarray        # (K,) pilot index of each UE, in {0..tau_p-1}
    copilot_sets: list          # per UE: sorted UE indices sharing its pilot (incl. itself)
    serving_sets: list          # per UE k: sorted AP indices serving k (M_k)
    served_sets: list           # per AP l: sorted UE indices served by l (D_l)
    master_of: np.ndarray = None  # (K,) master AP per UE, when built by the assignment rule

    @property
    def K(self):
        return len(self.serving_sets)

    @property
    def L(self):
        return len(self.served_sets)

    @property
    def cluster_sizes(self):
        return np.array([len(m) for m in self.serving_sets])

    @property
    def serve_mask(self):
        """Boolean (L, K) matrix, True where AP l serves UE k."""
        mask = np.zeros((self.L, self.K), dtype=bool)
        for k, aps in enumerate(self.serving_sets):
            mask[aps, k] = True
        return mask


def assign_pilots_and_clusters(setup, config):
    """Run the master-appointment / pilot / serving procedure on one drop."""
    beta = setup.beta                      # (L, K) average channel gains
    L, K = beta.shape
    tau_p = config.tau_p

    master = np.argmax(beta, axis=0)       # strongest AP per UE
    pilot_of = np.full(K, -1, dtype=np.int64)
    # accumulated pilot contamination trace(R_il*) per (AP, pilot)
    contamination = np.zeros((L, tau_p))
    master_pilots = [set() for _ in range(L)]  # pilots used by each master's appointees

    for k in range(K):
        m = master[k]
        # keep each master's appointees on distinct pilots whenever possible,
        # so no AP is forced to serve two UEs on the same pilot
        free = [t for t in range(tau_p) if t not in master_pilots[m]]
        candidates = free if free else range(tau_p)
        best = min(candidates, key=lambda t: (contamination[m, t], t))
        pilot_of[k] = best
        master_pilots[m].add(best)
        contamination[:, best] += setup.N * beta[:, k]

    served = [set() for _ in range(L)]
    for l in range(L):
        for t in range(tau_p):
            on_pilot = np.flatnonzero(pilot_of == t)
            if on_pilot.size == 0:
                continue
            appointees = [k for k in on_pilot if master[k] == l]
            if appointees:
                served[l].update(appointees)
            else:
                served[l].add(int(on_pilot[np.argmax(beta[l, on_pilot])]))

    served_sets = [np.array(sorted(s), dtype=np.int64) for s in served]
    serving_sets = [
        np.array([l for l in range(L) if k in served[l]], dtype=np.int64) for k in range(K)
    ]
    copilot_sets = [np.flatnonzero(pilot_of == pilot_of[k]).astype(np.int64) for k in range(K)]
    dcc = DccAssignment(pilot_of, copilot_sets, serving_sets, served_sets, master_of=master)
    validate_assignment(dcc, tau_p)
    return dcc


def all_serving_assignment(L, K, pilot_of):
    """Reference configuration where every AP serves every UE (M_k = {0..L-1}).

    Deliberately ignores the user-centric serving limits; used for the
    original-form accounting comparison, so it is not validated.
    """
    pilot_of = np.asarray(pilot_of, dtype=np.int64)
    all_aps = np.arange(L, dtype=np.int64)
    all_ues = np.arange(K, dtype=np.int64)
    copilot_sets = [np.flatnonzero(pilot_of == pilot_of[k]).astype(np.int64) for k in range(K)]
    return DccAssignment(
        pilot_of=pilot_of,
        copilot_sets=copilot_sets,
        serving_sets=[all_aps.copy() for _ in range(K)],
        served_sets=[all_ues.copy() for _ in range(L)],
    )


def validate_assignment(dcc, tau_p):
    """Assert the structural invariants of a cooperation-cluster assignment.

    Several UEs may share a pilot at one AP only when all of them are that
    AP's own appointees (possible only when a master runs out of pilots).
    """
    K, L = dcc.K, dcc.L
    for k in range(K):
        assert dcc.serving_sets[k].size > 0, f"UE {k} has an empty serving set"
        assert k in dcc.copilot_sets[k], f"UE {k} missing from its own co-pilot set"
        for i in dcc.copilot_sets[k]:
            assert dcc.pilot_of[i] == dcc.pilot_of[k]
    mask = dcc.serve_mask
    for k in range(K):
        assert np.array_equal(np.flatnonzero(mask[:, k]), dcc.serving_sets[k])
    for l in range(L):
        assert np.array_equal(np.flatnonzero(mask[l, :]), dcc.served_sets[l])
        forced = 0
        for t in set(dcc.pilot_of[dcc.served_sets[l]].tolist()):
            on_pilot = [k for k in dcc.served_sets[l] if dcc.pilot_of[k] == t]
            if len(on_pilot) > 1:
                assert dcc.master_of is not None and all(
                    dcc.master_of[k] == l for k in on_pilot
                ), f"AP {l} serves two non-appointed UEs on pilot {t}"
                forced += len(on_pilot) - 1
        assert len(dcc.served_sets[l]) <= tau_p + forced, f"AP {l} serves too many UEs"

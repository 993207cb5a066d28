"""Worked lumped-element design for the cross-Kerr cavity array.

Starting from cavity C and L, picks the junction inductance that cancels
the residual linear coupling (X_minus = 0), derives the effective couplings,
and prints them next to the fixed ratio zV/U = 4 and the model-unit values
for a chosen photon loss rate.  Derived U and V are negative (attractive);
the dynamics layer's phase diagrams are quoted for positive couplings, so
the signs are surfaced rather than silently flipped.
"""

import json

from kerrlattice import CancellationTarget, derive, solve_cancellation

C = 40e-15  # cavity capacitance [F]
L = 2e-9  # cavity inductance [H]
C_J = 2e-15  # junction capacitance [F]
Z = 2  # lattice coordination
KAPPA_HZ = 10e6  # photon loss rate [Hz]


def main() -> None:
    circuit = solve_cancellation(C, L, Z, CancellationTarget.E_J, C_J=C_J)
    d = derive(circuit)

    print(json.dumps({
        "E_J [J]": circuit.E_J,
        "L_J [H]": d.L_J,
        "resonance [GHz]": d.frequency / 1e9,
        "alpha": d.alpha,
        "X_plus": d.X_plus,
        "X_minus": d.X_minus,
        "E_C [Hz]": d.E_C,
        "U [Hz]": d.U,
        "V [Hz]": d.V,
        "t_ch [Hz]": d.t_ch,
    }, indent=2))

    print(f"\nfixed ratio zV/U = {(Z * d.V) / d.U}")
    print("model units (per kappa):",
          f"U = {d.U / KAPPA_HZ:.4g},",
          f"zV = {Z * d.V / KAPPA_HZ:.4g},",
          f"z*t_ch = {Z * d.t_ch / KAPPA_HZ:.4g}")
    for note in d.notes:
        print(f"note: {note}")


if __name__ == "__main__":
    main()

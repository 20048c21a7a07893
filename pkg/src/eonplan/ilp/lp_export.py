"""Write an instance as a CPLEX LP file for external solvers.

Variable names use the owning connection id and 1-based interval/slot/link
/path indices: q_c_i_p, R_c_p, W_c_f_p, psi_c_f_p, Y_c, Z_c, V_c, X_l_f,
Fmax.  One constraint per line keeps the file trivially parseable.
"""

from __future__ import annotations

from .instance import IlpInstance

__all__ = ["export_lp"]


def _coef(x: float) -> str:
    return f"{x:.17g}"


def export_lp(instance: IlpInstance, path: str) -> None:
    C = instance.num_demands
    F = instance.num_slots
    U = instance.horizon
    L = instance.num_links
    w1, w2, w3, w4, w5 = instance.weights
    gap_denom = 1.0 + instance.range_spread

    lines: list[str] = []
    lines.append("\\ multi-period routing and spectrum assignment")
    lines.append(f"\\ weights: {w1} {w2} {w3} {w4} {w5}")
    lines.append(f"\\ demands: {C}  links: {L}  slots: {F}  horizon: {U}")

    obj_terms: list[str] = []
    if C:
        for d in instance.demands:
            obj_terms.append(f"{_coef(w1 / C)} Y_{d.conn}")
        for d in instance.demands:
            obj_terms.append(f"{_coef(w2 / gap_denom)} Z_{d.conn}")
        for d in instance.demands:
            obj_terms.append(f"{_coef(w3 / gap_denom)} V_{d.conn}")
        for l in range(1, L + 1):
            for f in range(1, F + 1):
                obj_terms.append(f"{_coef(w4 / (L * F))} X_{l}_{f}")
        obj_terms.append(f"{_coef(w5 / F)} Fmax")
    lines.append("Minimize")
    lines.append(" obj: " + " + ".join(obj_terms) if obj_terms else " obj: Fmax")

    lines.append("Subject To")
    binaries: list[str] = []
    generals: list[str] = ["Fmax"]

    for d in instance.demands:
        c = d.conn
        P = len(d.paths)
        choice = []
        for p in range(1, P + 1):
            for i in range(1, U + 1):
                name = f"q_{c}_{i}_{p}"
                binaries.append(name)
                choice.append(name)
        lines.append(f" choice_{c}: " + " + ".join(choice) + " = 1")

        for p in range(1, P + 1):
            binaries.append(f"R_{c}_{p}")
            qsum = " + ".join(f"q_{c}_{i}_{p}" for i in range(1, U + 1))
            lines.append(f" pathind_{c}_{p}: {qsum} - R_{c}_{p} = 0")

        for p in range(1, P + 1):
            for f in range(1, F + 1):
                binaries.append(f"W_{c}_{f}_{p}")
                binaries.append(f"psi_{c}_{f}_{p}")
            wsum = " + ".join(f"W_{c}_{f}_{p}" for f in range(1, F + 1))
            qterms = " - ".join(
                f"{int(d.rho[p - 1, i - 1])} q_{c}_{i}_{p}" for i in range(1, U + 1)
            )
            lines.append(f" width_{c}_{p}: {wsum} - {qterms} = 0")

        for p in range(1, P + 1):
            lines.append(
                f" start_{c}_1_{p}: psi_{c}_1_{p} - W_{c}_1_{p} >= 0"
            )
            for f in range(2, F + 1):
                lines.append(
                    f" start_{c}_{f}_{p}: psi_{c}_{f}_{p} - W_{c}_{f}_{p}"
                    f" + W_{c}_{f - 1}_{p} >= 0"
                )

        psis = " + ".join(
            f"psi_{c}_{f}_{p}" for p in range(1, P + 1) for f in range(1, F + 1)
        )
        lines.append(f" single_{c}: {psis} <= 1")

        binaries.append(f"Y_{c}")
        generals.append(f"Z_{c}")
        generals.append(f"V_{c}")
        if d.has_prev:
            p = d.prev_path_pos + 1
            held = " + ".join(
                f"psi_{c}_{f}_{p}"
                for f in range(d.prev_start + 1, d.prev_start + d.prev_width + 1)
            )
            lines.append(f" disrupt_{c}: Y_{c} + {held} = 1")
        else:
            lines.append(f" disrupt_{c}: Y_{c} = 1")

        for p in range(1, P + 1):
            wsum = " + ".join(f"W_{c}_{f}_{p}" for f in range(1, F + 1))
            wneg = " - ".join(f"W_{c}_{f}_{p}" for f in range(1, F + 1))
            for i in range(1, U + 1):
                rho = int(d.rho[p - 1, i - 1])
                lines.append(
                    f" under_{c}_{i}_{p}: Z_{c} - {rho} R_{c}_{p} + {wsum} >= 0"
                )
                lines.append(
                    f" over_{c}_{i}_{p}: V_{c} + {rho} R_{c}_{p} - {wneg} >= 0"
                )

    for l in range(1, L + 1):
        for f in range(1, F + 1):
            binaries.append(f"X_{l}_{f}")
            terms = []
            for d in instance.demands:
                for p0, pth in enumerate(d.paths):
                    if (l - 1) in pth.links:
                        terms.append(f"W_{d.conn}_{f}_{p0 + 1}")
            lhs = " + ".join(terms) + f" - X_{l}_{f}" if terms else f"- X_{l}_{f}"
            lines.append(f" overlap_{l}_{f}: {lhs} <= 0")
    for l in range(1, L + 1):
        for f in range(1, F + 1):
            lines.append(f" top_{l}_{f}: {f} X_{l}_{f} - Fmax <= 0")

    lines.append("Binaries")
    for name in binaries:
        lines.append(f" {name}")
    lines.append("Generals")
    for name in generals:
        lines.append(f" {name}")
    lines.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")

"""Split-circle: control-norm trace against the 1 -> 2 component transition."""
from acopt.experiments import load_named, topology_peak
from acopt.scenarios import build
from acopt.trn import trn_minimize


def main():
    sc = build(load_named("split_circle"))
    P = sc.problem()
    res = trn_minimize(P, P.zeros(), sc.trust_region())
    peak = topology_peak(P.state(res.f), res.f)
    t = sc.system.time.nodes
    for m in range(1, sc.config.M + 1):
        print(f"m={m:3d} t={t[m]:.5f} |f|={peak.norms[m - 1]:.4e} components={peak.counts[m]}")
    print(f"peak at m = {peak.peak_step}, topology change at m = {peak.change_step}")


if __name__ == "__main__":
    main()

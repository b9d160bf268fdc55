"""Moving vertical interface: residual ratios of the final TRN iterations."""
from acopt.experiments import load_named, superlinear_tail
from acopt.scenarios import build
from acopt.trn import trn_minimize


def main():
    sc = build(load_named("move_interface"))
    P = sc.problem()
    res = trn_minimize(P, P.zeros(), sc.trust_region())
    for h in res.history[-6:]:
        print(f"{h.iter:4d} |grad| {h.grad_norm:.3e} delta {h.delta:.3e} cg {h.cg_iters:4d} "
              f"{h.status}")
    ratios, steps, decreasing, interior = superlinear_tail(res.history)
    print("ratios", ", ".join(f"{r:.3e}" for r in ratios), "decreasing:", decreasing,
          "interior:", interior)


if __name__ == "__main__":
    main()

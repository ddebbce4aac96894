"""Plots over finished run directories: fitness, genome size and Pareto front."""

import sys
import os
import json

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

COLORS = ["#2196F3", "#F44336", "#FF9800", "#4CAF50", "#9C27B0", "#444444",
          "#1565C0", "#795548", "#00BCD4", "#E91E63"]


def load_run(path):
    records = []
    with open(os.path.join(path, "generations.jsonl"), "r") as f:
        for line in f:
            if line.strip():
                records.append(json.loads(line))
    report = {}
    report_path = os.path.join(path, "report.json")
    if os.path.exists(report_path):
        with open(report_path, "r") as f:
            report = json.load(f)
    return {"name": os.path.basename(os.path.normpath(path)), "generations": records,
            "report": report}


def plot_fitness(runs, outdir, objective=0):
    fig, ax = plt.subplots(figsize=(8, 5))
    for i, run in enumerate(runs):
        gens = [r["gen"] for r in run["generations"]]
        color = COLORS[i % len(COLORS)]
        ax.plot(gens, [r["best"][objective] for r in run["generations"]],
                color=color, label=f"{run['name']} best")
        ax.plot(gens, [r["mean"][objective] for r in run["generations"]],
                color=color, linestyle="--", alpha=0.6)
    ax.set_xlabel("Generation")
    ax.set_ylabel(f"Objective {objective}")
    ax.set_title("Best (solid) and mean (dashed) fitness")
    ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)
    plt.tight_layout()
    plt.savefig(os.path.join(outdir, f"fitness_{objective}.png"), dpi=150)
    plt.close()


def plot_size(runs, outdir):
    fig, ax = plt.subplots(figsize=(8, 5))
    for i, run in enumerate(runs):
        gens = [r["gen"] for r in run["generations"]]
        color = COLORS[i % len(COLORS)]
        ax.plot(gens, [r["mean_rules"] for r in run["generations"]], color=color,
                label=f"{run['name']} mean rules")
        ax.plot(gens, [r["size_best"] for r in run["generations"]], color=color,
                linestyle=":", alpha=0.7)
    ax.set_xlabel("Generation")
    ax.set_ylabel("Rules")
    ax.set_title("Genome size (mean solid, champion dotted)")
    ax.legend(fontsize=7)
    plt.tight_layout()
    plt.savefig(os.path.join(outdir, "size.png"), dpi=150)
    plt.close()


def plot_pareto(runs, outdir):
    fig, ax = plt.subplots(figsize=(6, 6))
    drawn = False
    for i, run in enumerate(runs):
        front = [p for p in run["report"].get("archive", []) if len(p) == 2]
        if not front:
            continue
        xs, ys = zip(*sorted(front))
        ax.scatter(xs, ys, color=COLORS[i % len(COLORS)], label=run["name"], s=18)
        drawn = True
    if not drawn:
        plt.close()
        return False
    ax.set_xlabel("Objective 0")
    ax.set_ylabel("Objective 1")
    ax.set_title("Pareto archive")
    ax.legend(fontsize=7)
    plt.tight_layout()
    plt.savefig(os.path.join(outdir, "pareto.png"), dpi=150)
    plt.close()
    return True


def summarize(runs):
    out = {}
    for run in runs:
        last = run["generations"][-1] if run["generations"] else {}
        entry = {
            "generations": len(run["generations"]),
            "final_best": last.get("best"),
            "final_mean": last.get("mean"),
            "champion_rules": last.get("size_best"),
        }
        for key in ("validation_reward", "solved", "validation_score", "test_score"):
            if key in run["report"]:
                entry[key] = run["report"][key]
        if "esp" in run["report"]:
            entry["esp"] = run["report"]["esp"]
        out[run["name"]] = entry
    return out


def main():
    import argparse
    parser = argparse.ArgumentParser(description="Plot finished runs")
    parser.add_argument("runs", nargs="+", help="Run directories")
    parser.add_argument("--outdir", default="results")
    args = parser.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    runs = [load_run(p) for p in args.runs]

    summary = summarize(runs)
    with open(os.path.join(args.outdir, "summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    print(f"Summary saved to {args.outdir}/summary.json")

    print("Generating plots...")
    n_objectives = min(len(r["generations"][0]["best"]) for r in runs if r["generations"])
    for objective in range(n_objectives):
        plot_fitness(runs, args.outdir, objective)
    plot_size(runs, args.outdir)
    if plot_pareto(runs, args.outdir):
        print("  pareto.png written")
    print(f"Plots saved to {args.outdir}/")

    print(f"\n{'='*70}")
    print("Final generation")
    print(f"{'='*70}")
    print(f"  {'run':<30} {'best':>12} {'mean':>12} {'rules':>8}")
    print(f"  {'-'*30} {'-'*12} {'-'*12} {'-'*8}")
    for name, entry in summary.items():
        if entry["final_best"] is None:
            continue
        print(f"  {name[:30]:<30} {entry['final_best'][0]:>12.4f} "
              f"{entry['final_mean'][0]:>12.4f} {entry['champion_rules']:>8}")


if __name__ == "__main__":
    main()

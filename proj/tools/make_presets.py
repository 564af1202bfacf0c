#!/usr/bin/env python3
# Copyright 2026 The fedsim Authors
# SPDX-License-Identifier: Apache-2.0
#
# Regenerates presets/: one config per [task, K, algorithm, optimiser]
# combination, carrying the tuned hyperparameters for each pairing over a
# desk-scale surrogate federation with the matching class count, batch size,
# and sampled-clients-per-round shape.

import pathlib

# Surrogate federation shape per task family. Client counts are scaled down
# from the full benchmarks so a preset runs on one workstation; batch size,
# classes, and clients sampled per round keep the benchmark values.
SHAPES = {
    "cifar100": {
        "task": "mlp1", "dim": 64, "hidden": 32, "n_classes": 100,
        "n_clients": 50, "samples_per_client": 100, "dirichlet_alpha": 0.1,
        "batch_size": 32, "clients_per_round": 5, "task_seed": 1001,
    },
    "sent140": {
        "task": "sent140_shape", "n_clients": 400, "samples_per_client": 15,
        "nnz_per_sample": 25, "batch_size": 8, "clients_per_round": 22,
        "task_seed": 1002,
    },
    "femnist": {
        "task": "mlp1", "dim": 64, "hidden": 32, "n_classes": 62,
        "n_clients": 300, "samples_per_client": 170, "dirichlet_alpha": 0.3,
        "batch_size": 32, "clients_per_round": 30, "task_seed": 1003,
    },
    "shakespeare": {
        "task": "mlp1", "dim": 64, "hidden": 32, "n_classes": 79,
        "n_clients": 66, "samples_per_client": 200, "dirichlet_alpha": 0.5,
        "batch_size": 32, "clients_per_round": 7, "task_seed": 1004,
    },
}

# Tuned values per [task][K][algorithm][optimiser]:
#   fedgbo / mimelite / mfl: (eta, decay)        decay = beta or beta1
#   adaptivefedopt:          (eta_server, decay, eta_client)
#   fedavg:                  (eta,)
HYPERS = {
    "cifar100": {
        10: {
            "fedgbo":   {"rmsprop": (1e-4, 0.9),  "sgdm": (1e-1, 0.9),   "adam": (1e-3, 0.9)},
            "mimelite": {"rmsprop": (1e-3, 0.99), "sgdm": (1e-2, 0.9),   "adam": (1e-4, 0.9)},
            "mfl":      {"rmsprop": (1e-3, 0.9),  "sgdm": (1e-2, 0.99),  "adam": (1e-3, 0.99)},
            "adaptivefedopt": {"rmsprop": (1e-2, 0.9, 1e-2), "sgdm": (1e0, 0.99, 1e-1),
                               "adam": (1e-2, 0.9, 1e-2)},
            "fedavg": {"sgd": (1e-2,)},
        },
        50: {
            "fedgbo":   {"rmsprop": (1e-4, 0.9),  "sgdm": (1e-2, 0.99),  "adam": (1e-4, 0.99)},
            "mimelite": {"rmsprop": (1e-4, 0.9),  "sgdm": (1e-2, 0.9),   "adam": (1e-4, 0.9)},
            "mfl":      {"rmsprop": (1e-3, 0.99), "sgdm": (1e-2, 0.999), "adam": (1e-3, 0.99)},
            "adaptivefedopt": {"rmsprop": (1e-2, 0.6, 1e-2), "sgdm": (1e0, 0.9, 1e-2),
                               "adam": (1e-2, 0.9, 1e-2)},
            "fedavg": {"sgd": (1e-2,)},
        },
    },
    "sent140": {
        10: {
            "fedgbo":   {"rmsprop": (1e0, 0.6), "sgdm": (1e1, 0.99), "adam": (1e-1, 0.99)},
            "mimelite": {"rmsprop": (1e0, 0.6), "sgdm": (1e1, 0.99), "adam": (1e-1, 0.99)},
            "mfl":      {"rmsprop": (1e0, 0.6), "sgdm": (1e1, 0.99), "adam": (1e-1, 0.99)},
            "adaptivefedopt": {"rmsprop": (1e-1, 0.9, 1e0), "sgdm": (1e1, 0.9, 1e1),
                               "adam": (1e-1, 0.99, 1e-1)},
            "fedavg": {"sgd": (1e1,)},
        },
        50: {
            "fedgbo":   {"rmsprop": (1e-1, 0.6), "sgdm": (1e0, 0.99), "adam": (1e-2, 0.9)},
            "mimelite": {"rmsprop": (1e-1, 0.6), "sgdm": (1e0, 0.99), "adam": (1e-2, 0.6)},
            "mfl":      {"rmsprop": (1e-1, 0.9), "sgdm": (1e0, 0.99), "adam": (1e-2, 0.99)},
            "adaptivefedopt": {"rmsprop": (1e-1, 0.6, 1e0), "sgdm": (1e1, 0.99, 1e1),
                               "adam": (1e-1, 0.6, 1e-1)},
            "fedavg": {"sgd": (1e1,)},
        },
    },
    "femnist": {
        10: {
            "fedgbo":   {"rmsprop": (1e-2, 0.999), "sgdm": (1e-1, 0.6), "adam": (1e-2, 0.99)},
            "mimelite": {"rmsprop": (1e-2, 0.999), "sgdm": (1e-1, 0.9), "adam": (1e-2, 0.99)},
            "mfl":      {"rmsprop": (1e-3, 0.999), "sgdm": (1e-1, 0.9), "adam": (1e-2, 0.9)},
            "adaptivefedopt": {"rmsprop": (1e-3, 0.9, 1e-1), "sgdm": (1e0, 0.9, 1e-1),
                               "adam": (1e-2, 0.6, 1e-1)},
            "fedavg": {"sgd": (1e-1,)},
        },
        50: {
            "fedgbo":   {"rmsprop": (1e-4, 0.9),   "sgdm": (1e-1, 0.6),  "adam": (1e-3, 0.9)},
            "mimelite": {"rmsprop": (1e-4, 0.9),   "sgdm": (1e-2, 0.99), "adam": (1e-3, 0.99)},
            "mfl":      {"rmsprop": (1e-3, 0.999), "sgdm": (1e-1, 0.9),  "adam": (1e-3, 0.99)},
            "adaptivefedopt": {"rmsprop": (1e-3, 0.9, 1e-1), "sgdm": (1e0, 0.9, 1e-1),
                               "adam": (1e-2, 0.9, 1e-1)},
            "fedavg": {"sgd": (1e-1,)},
        },
    },
    "shakespeare": {
        10: {
            "fedgbo":   {"rmsprop": (1e-3, 0.9),  "sgdm": (1e0, 0.9), "adam": (1e-3, 0.6)},
            "mimelite": {"rmsprop": (1e-3, 0.9),  "sgdm": (1e0, 0.9), "adam": (1e-3, 0.6)},
            "mfl":      {"rmsprop": (1e-3, 0.99), "sgdm": (1e0, 0.9), "adam": (1e-3, 0.6)},
            "adaptivefedopt": {"rmsprop": (1e-2, 0.6, 1e-1), "sgdm": (1e0, 0.9, 1e0),
                               "adam": (1e-2, 0.6, 1e-1)},
            "fedavg": {"sgd": (1e0,)},
        },
        50: {
            "fedgbo":   {"rmsprop": (1e-4, 0.9),  "sgdm": (1e-1, 0.9), "adam": (1e-4, 0.6)},
            "mimelite": {"rmsprop": (1e-4, 0.9),  "sgdm": (1e-1, 0.9), "adam": (1e-4, 0.6)},
            "mfl":      {"rmsprop": (1e-3, 0.99), "sgdm": (1e-1, 0.9), "adam": (1e-3, 0.6)},
            "adaptivefedopt": {"rmsprop": (1e-2, 0.6, 1e-1), "sgdm": (1e0, 0.9, 1e-1),
                               "adam": (1e-2, 0.9, 1e-1)},
            "fedavg": {"sgd": (1e0,)},
        },
    },
}

SHAPE_KEYS = ["task", "dim", "hidden", "n_classes", "n_clients", "samples_per_client",
              "nnz_per_sample", "dirichlet_alpha", "task_seed"]


def fmt(v):
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


def optimiser_lines(alg, opt, values):
    lines = []
    if alg == "fedavg":
        lines.append(("eta", values[0]))
        return lines
    if alg == "adaptivefedopt":
        eta_server, decay, eta_client = values
        lines.append(("eta", eta_client))
        lines.append(("eta_server", eta_server))
    else:
        eta, decay = values
        lines.append(("eta", eta))
    if opt == "adam":
        lines.append(("beta1", decay))
        lines.append(("beta2", 0.99))
    else:
        lines.append(("beta", decay))
    if opt in ("rmsprop", "adam"):
        lines.append(("epsilon", 1e-3))
    return lines


def main():
    out_dir = pathlib.Path(__file__).resolve().parent.parent / "presets"
    out_dir.mkdir(exist_ok=True)
    for old in out_dir.glob("*.cfg"):
        old.unlink()
    count = 0
    for dataset, shape in SHAPES.items():
        for k_steps, algs in HYPERS[dataset].items():
            for alg, opts in algs.items():
                for opt, values in opts.items():
                    name = f"{dataset}_k{k_steps}_{alg}_{opt}.cfg"
                    lines = [f"# {dataset} surrogate federation, {alg} + {opt}, K = {k_steps}"]
                    for key in SHAPE_KEYS:
                        if key in shape:
                            lines.append(f"{key} = {fmt(shape[key])}")
                    lines.append(f"algorithm = {alg}")
                    lines.append(f"optimiser = {opt}")
                    for key, value in optimiser_lines(alg, opt, values):
                        lines.append(f"{key} = {fmt(value)}")
                    lines.append(f"k_steps = {k_steps}")
                    lines.append(f"batch_size = {shape['batch_size']}")
                    lines.append(f"clients_per_round = {shape['clients_per_round']}")
                    lines.append("rounds = 5000")
                    lines.append("eval_every = 50")
                    lines.append("seeds = [1, 2, 3, 4, 5]")
                    (out_dir / name).write_text("\n".join(lines) + "\n")
                    count += 1
    print(f"wrote {count} presets to {out_dir}")


if __name__ == "__main__":
    main()

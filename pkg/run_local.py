#!/usr/bin/env python3
"""
Local acceptance runner for the multiplicative chaos lab
Runs every acceptance check through the CLI at a quick or full preset
"""

import os
import sys
import time
from pathlib import Path
from typing import Dict, List
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

from main import EXIT_OK, ExperimentConfig, run

# (command, overrides) per preset; the full preset uses the acceptance sizes
PRESETS: Dict[str, List[tuple]] = {
    "quick": [
        ("verify-plancherel", {'y': 50, 'r': [0.1, 0.5]}),
        ("simulate-sum", {'x': 1e3, 'y': 50, 'r': [0.2], 'trials': 400}),
        ("dickman", {'check': True, 'eps': 0.2, 'delta': 0.02}),
        ("tshift", {'y': 1e4, 't': [0.0, 0.5, 1.0]}),
        ("truncate", {'xs': [1e3, 1e4], 'eps': 0.2, 'delta': 0.2, 'trials': 50}),
        ("chaos-measure", {'y': 1e3, 'u': [0.0, 1.0, 2.0], 'trials': 100}),
        ("modified-moment", {'ys': [1e2, 1e3], 'u': [1.0], 'L': 1.0, 'trials': 100}),
        ("coupling-report", {'y': 1e3, 'ys': [1e2, 1e3], 'trials': 50}),
        ("chaining-demo", {'y': 1e2, 'n_max': 2, 'trials': 50}),
        ("anatomy", {'x': 1e5, 'y': 100}),
        ("moment-trend", {'xs': [1e3, 1e4], 'q': 0.5, 'trials': 200}),
        ("limit-test", {'xs': [1e3, 1e4], 'eps': 0.1, 'delta': 0.05, 'trials': 200}),
    ],
    "full": [
        ("verify-plancherel", {'y': 50, 'r': [0.1, 0.5]}),
        ("simulate-sum", {'x': 1e4, 'y': 50, 'r': [0.2], 'trials': 2000}),
        ("dickman", {'check': True, 'eps': 0.2, 'delta': 0.02}),
        ("tshift", {'y': 1e6, 't': [0.0, 0.5, 1.0]}),
        ("truncate", {'xs': [1e4, 1e5, 1e6], 'eps': 0.2, 'delta': 0.2, 'trials': 200}),
        ("chaos-measure", {'y': 1e5, 'u': [0.0, 1.0, 2.0], 'trials': 500}),
        ("modified-moment", {'ys': [1e2, 1e3, 1e4], 'u': [1.0], 'L': 1.0, 'trials': 500}),
        ("coupling-report", {'y': 1e4, 'ys': [1e2, 1e3, 1e4], 'trials': 200}),
        ("chaining-demo", {'y': 1e3, 'n_max': 3, 'trials': 200}),
        ("anatomy", {'x': 1e7, 'y': 1e3}),
        ("moment-trend", {'xs': [1e4, 1e5, 1e6, 1e7], 'q': 0.5, 'trials': 1000}),
        ("limit-test", {'xs': [1e4, 1e5, 1e6], 'eps': 0.1, 'delta': 0.05, 'trials': 2000, 'stable': True}),
    ],
}


def run_acceptance_suite(preset: str = "quick", output_dir: str = None) -> int:
    """
    Run every acceptance check at a preset

    Args:
        preset: "quick" (minutes) or "full" (acceptance sizes)
        output_dir: Where artifacts go; defaults to <RMF_LAB_OUTPUT_DIR>/<preset>

    Returns:
        0 when every check passed, otherwise the largest exit status seen
    """
    if preset not in PRESETS:
        raise ValueError(f"Unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    target = output_dir or os.path.join(os.environ.get("RMF_LAB_OUTPUT_DIR", "results"), preset)
    Path(target).mkdir(parents=True, exist_ok=True)

    worst = EXIT_OK
    for command, overrides in PRESETS[preset]:
        config = ExperimentConfig(command=command, output_dir=target, **overrides)
        print(f"\n▶ {command}")
        started = time.time()
        status = run(command, config)
        print(f"   exit {status} in {time.time() - started:.1f}s")
        worst = max(worst, status)
    return worst


def main():
    """Run the acceptance suite locally"""
    preset = sys.argv[1] if len(sys.argv) > 1 else "quick"

    print("\n" + "="*60)
    print(f"🚀 Running acceptance suite (preset: {preset})")
    print("="*60)

    try:
        status = run_acceptance_suite(preset)
    except KeyboardInterrupt:
        print("\n\n👋 Interrupted")
        sys.exit(130)
    except Exception as e:
        print(f"\n❌ Error running suite: {e}")
        sys.exit(1)

    print("\n" + ("✅ All checks passed" if status == EXIT_OK else f"⚠️  Finished with exit status {status}"))
    sys.exit(status)

if __name__ == "__main__":
    main()

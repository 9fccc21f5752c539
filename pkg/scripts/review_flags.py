"""
Review Flags

Helper script to review the DG/FV representation of the snapshots of a run.
Shows the FV fraction over time and the elements flagged in the last snapshot.
"""

import json
import sys
from pathlib import Path

import pandas as pd


def print_banner(text):
    """Print a formatted banner"""
    print("\n" + "=" * 80)
    print(f"  {text}")
    print("=" * 80 + "\n")


def print_section(title):
    """Print a section header"""
    print(f"\n--- {title} ---")


def load_table(path: Path) -> pd.DataFrame:
    if path.suffix == ".parquet":
        return pd.read_parquet(path)
    return pd.read_csv(path)


def review_flags(run_dir: str = "./output"):
    """
    Review element representations of every snapshot in a run directory

    Args:
        run_dir: Directory written by `simulate`
    """
    run_path = Path(run_dir)
    metadata_files = sorted(run_path.glob("*.meta.json"))

    if not metadata_files:
        print(f"Error: no snapshots found in {run_path}")
        print("   Run a case first: python -m src.cli.main simulate --case riemann4 ...")
        return 1

    print_banner("Flag Review")
    print(f"Run directory: {run_path}\n")

    rows = []
    last_table = None
    for meta_path in metadata_files:
        key = meta_path.name[:-len(".meta.json")]
        metadata = json.loads(meta_path.read_text())
        table_path = next((p for p in (run_path / f"{key}.csv", run_path / f"{key}.parquet") if p.exists()), None)
        if table_path is None:
            continue
        table = load_table(table_path)
        per_element = table.groupby('element').first()
        rows.append({
            'snapshot': key,
            'time': metadata.get('time'),
            'step': metadata.get('step'),
            'elements': len(per_element),
            'fv_elements': int((per_element['representation'] == 1).sum()),
            'max_indicator': per_element['indicator'].max(),
        })
        if key != "snapshot_failure":
            last_table = per_element

    summary = pd.DataFrame(rows).sort_values('time', kind='stable')
    summary['fv_fraction'] = summary['fv_elements'] / summary['elements']

    # ========================================================================
    # 1. FV fraction over time
    # ========================================================================
    print_section("FV fraction per snapshot")
    print(summary.to_string(index=False))

    # ========================================================================
    # 2. Flagged elements of the last snapshot
    # ========================================================================
    if last_table is not None:
        flagged = last_table[last_table['representation'] == 1]
        print_section(f"FV elements in the last snapshot ({len(flagged)})")
        if len(flagged):
            centers = flagged[['x', 'y', 'indicator']].sort_values('indicator', ascending=False)
            print(centers.head(20).to_string())
        else:
            print("No FV elements")

    if (run_path / "snapshot_failure.meta.json").exists():
        failure = json.loads((run_path / "snapshot_failure.meta.json").read_text())
        custom = failure.get('custom_metadata', {})
        print_banner("Run failed")
        print(f"Element {custom.get('failure_element')} at t={custom.get('failure_time')}")

    return 0


def main():
    """Main entry point"""
    run_dir = sys.argv[1] if len(sys.argv) > 1 else "./output"
    return review_flags(run_dir)


if __name__ == "__main__":
    sys.exit(main())

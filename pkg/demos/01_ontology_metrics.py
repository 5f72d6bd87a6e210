#!/usr/bin/env python3
"""Load the demo city ontology, validate it, and compare structure metrics.

Shows how facet exclusion (dropping administrative classes) changes the
class/relation counts while depth and branching stay comparable.
"""

from pathlib import Path

from cosuggest import compute_metrics, load_ontology, subset_by_facet

DATA = Path(__file__).parent / "data"


def show(title, metrics):
    print(f"{title}")
    print(f"  classes (excl. root):       {metrics.class_count}")
    print(f"  subclass relations:         {metrics.subclass_relation_count}")
    print(f"  longest root-to-leaf path:  {metrics.longest_root_to_leaf_path} edges")
    print(f"  mean node degree:           {metrics.mean_node_degree:.3f}")


def main():
    ontology = load_ontology(DATA / "city_ontology.json")
    print(f"Loaded {len(ontology.classes)} classes rooted at {ontology.root_id!r}.\n")

    show("Full ontology", compute_metrics(ontology))

    subset = subset_by_facet(ontology, {"administrative"})
    print()
    show("Without the administrative facet", compute_metrics(subset))
    dropped = sorted(set(ontology.classes) - set(subset.classes))
    print(f"\nDropped classes: {', '.join(dropped)}")


if __name__ == "__main__":
    main()

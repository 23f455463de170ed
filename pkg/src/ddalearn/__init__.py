"""Incremental dialogue-act learning from prosodically annotated speech.

Segments of a dialogue are turned into feature cases, clustered online
into a concept hierarchy, labelled with pruned hierarchy classes and
predicted with an n-gram model over those classes.
"""

__version__ = "0.1.0"

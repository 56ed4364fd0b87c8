"""Semantic conversion of agent communication acts through a shared ontology."""

"""Partitions, random features, collocation and system assembly."""

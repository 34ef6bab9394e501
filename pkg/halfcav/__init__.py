"""Half-cavity quantum memory: one two-level atom in front of a movable mirror."""

"""Intersections of pairs of linear complex structures."""

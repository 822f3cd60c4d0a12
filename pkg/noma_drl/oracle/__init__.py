"""
Exhaustive-search oracle for channel assignment.
"""

from .exhaustive_search import SearchResult, assignment_count, enumerate_assignments, search

__all__ = ["SearchResult", "assignment_count", "enumerate_assignments", "search"]

"""Service layer modules: measures, suites, reports."""

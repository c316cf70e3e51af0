# Keeps this directory importable so the test modules can share helpers.py.

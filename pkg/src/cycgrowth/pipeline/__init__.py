"""Configuration, data assembly, synthetic DGPs and table runs."""

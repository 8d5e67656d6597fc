# Command surface: evolve, test, inspect, export-curves

app_name = "nagi_lab"
app_title = "NAGI Lab"
app_publisher = "NAGI Lab contributors"
app_description = "Evolution harness for plastic spiking neural networks in mutable environments"
app_email = "nagi-lab@example.org"
app_license = "mit"

# Apps
# ------------------

# The simulator has no DocTypes and needs no other app.
required_apps = []

# Bench Commands
# ------------------
# `bench nagi-lab evolve food-foraging --profile desk` mounts the click group
# exported as `nagi_lab.commands.commands`.

# Run Files
# ------------------
# Schema versions written into every run manifest; bump when a column or
# field changes meaning. Documented in RUN_FORMAT.md.
stats_schema_version = 1
champion_schema_version = 1
report_schema_version = 1

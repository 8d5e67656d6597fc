# Spiking network simulation and plasticity

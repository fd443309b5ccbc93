"""Truck-and-drone routing (FSTSP / TSP-D) with a hybrid general VNS."""

"""Growth rates of protograph-based LDPC convolutional code ensembles."""

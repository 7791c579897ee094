def heuristics_v2(edge_attr: np.ndarray) -> np.ndarray:
    min_attr = np.min(edge_attr)
    max_attr = np.max(edge_attr)
    range_attr = max_attr - min_attr
    
    # Polynomial transformation
    polynomial_attr = np.power(edge_attr - min_attr, 2)  # Using square transformation
    
    # Simplified hybrid scaling technique
    scaled_attr = (polynomial_attr - np.min(polynomial_attr)) / (range_attr + 1e-10)
    
    # Weighted hybrid mean capturing edge attribute diversity
    weighted_mean = np.mean(polynomial_attr)
    heuristics_matrix = (weighted_mean / (scaled_attr + 1e-10)) ** 2  # Prioritize lower attributes
    
    return heuristics_matrix.flatten()  # Return as a 1D array

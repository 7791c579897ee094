def heuristics(prize, distance, maxlen):
    n = distance.shape[0]
    heuristics_matrix = 1.0 / (distance + np.eye(n))
    np.fill_diagonal(heuristics_matrix, 0.0)
    return heuristics_matrix

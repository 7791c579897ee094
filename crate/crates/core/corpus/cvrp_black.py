def heuristics(edge_attr, node_attr):
    import numpy as np

    n = edge_attr.shape[0]
    heuristics_matrix = np.zeros_like(edge_attr)

    normalization_factor = np.power(node_attr, 1/3)
    adaptive_weights = np.ones_like(edge_attr)

    max_iterations = 100
    tolerance = 1e-5
    exploration_factor = 0.1
    damping_factor = 0.8  # Damping factor to mitigate oscillations

    previous_heuristics_matrix = np.copy(heuristics_matrix)

    for iteration in range(max_iterations):
        for i in range(n):
            for j in range(n):
                if edge_attr[i, j] != 0:
                    heuristics_matrix[i, j] = (normalization_factor[i] * normalization_factor[j]) / (edge_attr[i, j] ** 2)
                    adaptive_weights[i, j] = damping_factor * adaptive_weights[i, j] + (1 - damping_factor) * heuristics_matrix[i, j]

        heuristics_matrix *= adaptive_weights
        
        # Calculate mean and std deviation for adaptive weight adjustments
        positive_heuristics = heuristics_matrix[heuristics_matrix > 0]
        if len(positive_heuristics) > 0:
            mean_heuristics = np.mean(positive_heuristics)
            std_dev = np.std(positive_heuristics)

            for i in range(n):
                for j in range(n):
                    if edge_attr[i, j] != 0:
                        adaptive_weights[i, j] = np.clip(adaptive_weights[i, j] + 0.01 * (mean_heuristics - std_dev), 0, None)

        if np.max(np.abs(heuristics_matrix - previous_heuristics_matrix)) < tolerance:
            break

        previous_heuristics_matrix = np.copy(heuristics_matrix)

    return heuristics_matrix

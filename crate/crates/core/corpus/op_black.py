def heuristics_v2(node_attr, edge_attr, node_constraint):
    n = len(node_attr)
    heuristics_matrix = np.zeros((n, n))

    special_node_attr = node_attr[0]  # Attribute of the special node indexed by 0

    # Initialize adaptive thresholds based on a new factor
    edge_threshold = np.maximum(edge_attr.sum(axis=0) * 0.7, node_constraint)  # New threshold adjustment factor
    score_history = np.zeros(n)  # to store history of scores for feedback mechanism
    fixed_weight = 0.25  # Adjusted fixed weight for scoring

    for i in range(1, n):
        for j in range(n):
            if i != j:  # Skip self-loops
                edge_sum = edge_attr[i, j]
                if edge_sum > 0 and edge_sum <= edge_threshold[j]:
                    connection_diversity = np.sum(edge_attr[i] > 0)
                    diversity_contribution = (special_node_attr * node_attr[j] * connection_diversity) / (edge_sum ** 2 + 1e-10)

                    # Introduce modified fixed weight into score calculation
                    weighted_score = fixed_weight * (node_attr[j] ** 2) / (edge_sum + 1e-10)
                    score = diversity_contribution * (weighted_score * (node_constraint / (edge_sum + 1e-10)))

                    # Update thresholds based on previous scores with adjustments for sensitivity
                    edge_threshold[j] = max(edge_threshold[j], score / (1 + score_history[j] ** 0.5))  # dynamic adjustment with sensitivity

                    # Ensure non-negativity and log scores for feedback mechanism
                    heuristics_matrix[i, j] = max(0, score)
                    score_history[j] = score  # Store the latest score

    return heuristics_matrix

def heuristic_v2(distance_matrix, coordinates, demands, capacity):
    n = distance_matrix.shape[0]
    heuristics_matrix = np.zeros((n, n))

    historical_performance = np.ones((n, n))
    total_edge_visits = np.zeros((n, n))

    learning_rate = 0.3
    regularization_term = 0.01

    for i in range(1, n):
        for j in range(1, n):
            if i != j:
                total_demand = demands[i] + demands[j]

                distance_score = 1 / (distance_matrix[i, j] ** 2 + 1e-5)  # Reduced emphasis on proximity
                proximity_score = 1 / (np.linalg.norm(coordinates[i] - coordinates[j]) ** 2 + 1e-5)

                if total_demand <= capacity:
                    edge_score = distance_score * proximity_score * historical_performance[i, j]
                else:
                    dynamic_penalty = (total_demand ** 2) / (capacity + 1e-5)  # Heavier penalty for high demand
                    edge_score = (distance_score * proximity_score * historical_performance[i, j]) / dynamic_penalty

                # Adjusting clustering factor to consider only higher than average demand
                avg_demand = np.mean(demands[1:])
                clustering_factor = sum(demands[k] for k in range(1, n) if demands[k] > avg_demand and np.linalg.norm(coordinates[k] - coordinates[i]) < np.linalg.norm(coordinates[k] - coordinates[j])) / max(avg_demand, 1e-5)
                edge_score *= (1 + clustering_factor)

                decay_factor = 1 / (1 + total_edge_visits[i, j])
                historical_performance[i, j] = (1 - learning_rate) * historical_performance[i, j] + learning_rate * edge_score
                historical_performance[i, j] = historical_performance[i, j] / (1 + regularization_term * total_edge_visits[i, j])

                total_edge_visits[i, j] += 1

                heuristics_matrix[i, j] = edge_score

    return heuristics_matrix

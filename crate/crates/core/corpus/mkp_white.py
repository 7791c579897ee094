def heuristics_reevo(prize, weight):
    n = len(prize)
    m = weight.shape[1]
    heuristics_matrix = np.zeros(n)

    global_average = np.mean(prize)
    performance_metrics = np.zeros(n)  # Track performance of selections
    selection_counts = np.zeros(n)  # Track the number of selections made
    temperature = 1.0  # Initial temperature for exploration
    max_iterations = 100  # Maximum iterations for the process
    iteration = 0  # Current iteration
    reset_threshold = 20  # Periodic reset interval
    synergy_matrix = np.zeros((n, n))  # Store synergy potential between items

    while iteration < max_iterations:
        for i in range(n):
            max_weight = np.max(weight[i])
            if max_weight > 0:
                efficiency_score = prize[i] / max_weight  # Efficiency of prize-to-weight ratio
                diversity_factor = 1 / (1 + np.abs(prize[i] - global_average))  # Encourages diversity

                # Update performance metrics
                if selection_counts[i] > 0:
                    performance_metrics[i] = (performance_metrics[i] * 0.5 + efficiency_score * 0.5)
                else:
                    performance_metrics[i] = efficiency_score

                # Synergy potential computation with diversity weighting
                for j in range(n):
                    if i != j:
                        synergy_weight = np.exp(-np.abs(weight[i] - weight[j]).sum())  # High synergy if weights are similar
                        synergy_matrix[i][j] = synergy_weight * (1 + 0.5 * np.abs(prize[i] - prize[j]) / (np.max(prize) - np.min(prize)))        

                # Calculate total synergy score with normalization
                total_synergy = np.sum(synergy_matrix[i]) / (n - 1)  # Normalize
                heuristics_matrix[i] = efficiency_score * diversity_factor * performance_metrics[i] * total_synergy

                # Dynamic exploration-exploitation balancing
                adaptive_exploration_probability = 1 / (1 + selection_counts[i] * temperature)
                if np.random.rand() < adaptive_exploration_probability:
                    selection_counts[i] += 1

        # Periodic exploration reset
        if iteration % reset_threshold == 0:
            performance_metrics = np.zeros(n)  # Reset performance metrics to enhance exploration

        # Temperature decay adjustment
        average_performance = np.mean(performance_metrics) + 0.1  # Update based on performance
        temperature = max(0.1, temperature * (0.99 + 0.01 * average_performance))  # Gradually decay temperature

        iteration += 1

    return heuristics_matrix

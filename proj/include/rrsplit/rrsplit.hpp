#pragma once

#include "rrsplit/cases.hpp"
#include "rrsplit/cutoff.hpp"
#include "rrsplit/fem.hpp"
#include "rrsplit/mesh.hpp"
#include "rrsplit/quadrature.hpp"
#include "rrsplit/scheme.hpp"
#include "rrsplit/sparse.hpp"
#include "rrsplit/study.hpp"

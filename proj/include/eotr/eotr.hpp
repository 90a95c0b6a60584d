#ifndef EOTR_EOTR_HPP
#define EOTR_EOTR_HPP

#include <eotr/rational.hpp>
#include <eotr/errors.hpp>
#include <eotr/matrix.hpp>
#include <eotr/frobenius.hpp>
#include <eotr/multiform.hpp>
#include <eotr/local_forms.hpp>
#include <eotr/recursion.hpp>
#include <eotr/correlators.hpp>
#include <eotr/io.hpp>
#include <eotr/commands.hpp>

#endif
